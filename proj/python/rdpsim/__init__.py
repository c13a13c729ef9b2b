"""Python front end for the rdpsim emulator."""

import json

from ._rdpsim import (
    ConfigError,
    attack,
    capture_trace,
    coverage,
    decode_trace,
    devices,
    image,
    provision,
)

ATTACKS = ("D0", "D1A", "D1B", "D1C", "D2", "H0", "H1", "H2", "H3")


def profile(name):
    from ._rdpsim import profile_json

    return json.loads(profile_json(name))


def extract(device, attack_id, rdp=1, seed=1, image_kind="random", **options):
    """Provision a fresh part with a seeded image and run one attack on it.

    Returns (ground_truth_image, report_dict).
    """
    img = image(device, image_kind, seed)
    snap = provision(device, img, rdp, seed)
    return img, attack(snap, attack_id, **options)


__all__ = [
    "ATTACKS",
    "ConfigError",
    "attack",
    "capture_trace",
    "coverage",
    "decode_trace",
    "devices",
    "extract",
    "image",
    "profile",
    "provision",
]

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rdpsim/gf2.hpp"
#include "rdpsim/qspi.hpp"

namespace rdpsim {

struct DecodedFirmware {
    std::vector<uint8_t> image;       // flash_size bytes; gap bytes are 0xFF
    std::vector<bool> page_present;   // one per page
    std::vector<std::pair<uint32_t, uint32_t>> gaps;  // [begin, end) byte ranges

    uint32_t pages_present() const;
    double coverage_percent() const;
};

// Undo the inter-die scrambling for every firmware page in the trace.
// Pages are placed by their (unscrambled) bus address; later copies of the
// same page overwrite earlier ones.
DecodedFirmware decode_firmware(const QspiTrace& trace, const QspiLayout& layout,
                                uint32_t flash_size, const ObfuscationKey& key);

// Probe firmware for an attacker-owned device: pages 0..7 carry one all-zero
// word at the single-bit offsets, pages 8..12 the five bit-test words at
// the page start. Everything else is 0xFF.
std::vector<uint8_t> inference_probe_image(uint32_t flash_size, uint32_t page_size = 1024);
constexpr uint32_t kBitTestFirstPage = 8;

// Recovers the key from a boot trace of the probe image.
ObfuscationKey infer_key_from_trace(const QspiTrace& trace, const QspiLayout& layout);

nlohmann::json gaps_to_json(const DecodedFirmware& d);

}  // namespace rdpsim

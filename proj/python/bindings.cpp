#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rdpsim/coverage.hpp"
#include "rdpsim/exploits.hpp"
#include "rdpsim/snapshot.hpp"

namespace py = pybind11;
using namespace rdpsim;

namespace {

py::bytes to_bytes(const std::vector<uint8_t>& v) {
    return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

std::vector<uint8_t> from_bytes(const py::bytes& b) {
    std::string s = b;
    return {s.begin(), s.end()};
}

uint16_t raw_for_level(int level) {
    switch (level) {
    case 0: return kRdpRawL0;
    case 1: return 0xBB44;
    case 2: return kRdpRawL2;
    }
    throw ConfigError("rdp level must be 0, 1 or 2");
}

std::unique_ptr<Device> powered(const py::bytes& snapshot, bool capture = false) {
    auto dev = Snapshot::deserialize(from_bytes(snapshot)).instantiate();
    if (capture)
        dev->start_capture();
    dev->apply_power_event(PowerEvent::power_on());
    return dev;
}

py::dict report_dict(const ExtractionReport& r) {
    py::dict d;
    d["device"] = enum_name(r.device);
    d["attack"] = enum_name(r.attack);
    d["status"] = enum_name(r.status);
    d["coverage_percent"] = r.coverage_percent;
    d["valid_words"] = r.valid_words();
    d["op_count"] = r.op_count;
    d["detail"] = r.detail;
    d["recovered"] = to_bytes(r.recovered);
    d["valid"] = r.valid;
    d["report_json"] = report_to_json(r).dump();
    d["transcript_json"] = r.transcript.to_json().dump();
    return d;
}

}  // namespace

PYBIND11_MODULE(_rdpsim, m) {
    m.doc() = "Behavioral RDP extraction emulator";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("devices", [] {
        std::vector<std::string> out;
        for (auto d : all_devices())
            out.push_back(enum_name(d));
        return out;
    });

    m.def("profile_json", [](const std::string& name) {
        nlohmann::json j = profile_for(name);
        return j.dump();
    });

    m.def("coverage", [](const std::string& name) {
        auto c = compute_coverage(profile_for(name));
        py::dict d;
        d["percent"] = c.percent;
        d["readable_words"] = c.readable_words;
        d["total_words"] = c.total_words;
        d["readable"] = c.readable;
        return d;
    });

    m.def("image", [](const std::string& name, const std::string& kind, uint64_t seed) {
        const auto& p = profile_for(name);
        if (kind == "random")
            return to_bytes(random_victim_image(p, seed));
        if (kind == "structured")
            return to_bytes(structured_victim_image(p, seed));
        if (kind == "probe")
            return to_bytes(inference_probe_image(p.flash_size));
        throw ConfigError("unknown image kind: " + kind);
    }, py::arg("device"), py::arg("kind") = "random", py::arg("seed") = 1);

    m.def("provision", [](const std::string& name, const py::bytes& image, int rdp, uint64_t seed) {
        Device d(profile_for(name), seed);
        d.provision(from_bytes(image), raw_for_level(rdp));
        return to_bytes(Snapshot::of(d).serialize());
    }, py::arg("device"), py::arg("image"), py::arg("rdp") = 1, py::arg("seed") = 1,
       "Program a part and return its snapshot bytes.");

    m.def("attack", [](const py::bytes& snapshot, const std::string& id, uint32_t glitch_us,
                       bool skip_glitch, uint32_t attempts, const std::string& injector_line,
                       bool infer, bool touch_all_pages) {
        AttackOptions opt;
        opt.glitch_us = glitch_us;
        opt.skip_glitch = skip_glitch;
        opt.attempts = attempts;
        opt.infer_matrices = infer;
        opt.touch_all_pages = touch_all_pages;
        if (!injector_line.empty()) {
            auto inj = h2_address_injector();
            inj.line = parse_enum<QspiLine>(injector_line, "QSPI line");
            opt.injector = inj;
        }
        auto attack_id = parse_enum<AttackId>(id, "attack");
        auto dev = powered(snapshot);
        AttackRig rig(*dev);
        return report_dict(run_attack(attack_id, rig, opt));
    }, py::arg("snapshot"), py::arg("attack"), py::arg("glitch_us") = 300,
       py::arg("skip_glitch") = false, py::arg("attempts") = 3, py::arg("injector_line") = "",
       py::arg("infer") = false, py::arg("touch_all_pages") = true);

    m.def("capture_trace", [](const py::bytes& snapshot) {
        auto dev = powered(snapshot, true);
        std::ostringstream s;
        write_trace(s, dev->stop_capture());
        return s.str();
    }, "Power a snapshot on and return its boot QSPI trace as JSON.");

    m.def("decode_trace", [](const std::string& trace_json, const std::string& name, bool infer) {
        std::istringstream in(trace_json);
        auto t = read_trace(in);
        const auto& p = profile_for(name.empty() ? t.device : name);
        if (!p.qspi_layout || !p.obfuscation)
            throw ConfigError(enum_name(p.name) + " has no QSPI layout");
        ObfuscationKey key = p.obfuscation->key;
        if (infer) {
            Device twin(p, 1);
            twin.provision({}, kRdpRawL0);
            twin.apply_power_event(PowerEvent::power_on());
            key = infer_key_from_trace(capture_probe_trace(twin), *p.qspi_layout);
        }
        auto fw = decode_firmware(t, *p.qspi_layout, p.flash_size, key);
        py::dict d;
        d["image"] = to_bytes(fw.image);
        d["page_present"] = fw.page_present;
        d["coverage_percent"] = fw.coverage_percent();
        d["key_matches_profile"] = key == p.obfuscation->key;
        return d;
    }, py::arg("trace_json"), py::arg("device") = "", py::arg("infer") = false);
}

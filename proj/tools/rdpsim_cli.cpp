// rdpsim: provision emulated parts, run extraction attacks, capture and
// decode QSPI traces.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>

#include <CLI11.hpp>

#include "rdpsim/coverage.hpp"
#include "rdpsim/exploits.hpp"
#include "rdpsim/snapshot.hpp"

using namespace rdpsim;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAttackFailed = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw UsageError("cannot read " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
    if (auto parent = fs::path(path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw UsageError("cannot write " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

void write_json(const std::string& path, const nlohmann::json& j) {
    if (auto parent = fs::path(path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    std::ofstream f(path);
    if (!f)
        throw UsageError("cannot write " + path);
    f << j.dump(2) << '\n';
}

DeviceProfile resolve_profile(const std::string& name_or_file) {
    if (fs::exists(name_or_file) && fs::is_regular_file(name_or_file))
        return load_profile_file(name_or_file);
    try {
        return profile_for(name_or_file);
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
}

std::string default_out() {
    const char* env = std::getenv("RDPSIM_OUT");
    return env && *env ? env : "rdpsim-out";
}

uint16_t raw_for_level(int level) {
    switch (level) {
    case 0: return kRdpRawL0;
    case 1: return 0xBB44;  // any non-canonical value decodes to L1
    case 2: return kRdpRawL2;
    }
    throw UsageError("--rdp must be 0, 1 or 2");
}

std::string pct(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << v << " %";
    return s.str();
}

void print_profile_summary(const DeviceProfile& p) {
    std::cout << enum_name(p.name) << "  " << p.part_number << "  " << p.isa
              << "  flash " << p.flash_size / 1024 << " KiB  sram " << p.sram_size / 1024 << " KiB"
              << (p.dual_die ? "  dual-die" : "") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Emulated RDP extraction bench"};
    app.require_subcommand(1);

    // device
    auto* device = app.add_subcommand("device", "Inspect device profiles");
    device->require_subcommand(1);
    auto* dev_list = device->add_subcommand("list", "List built-in profiles");
    auto* dev_info = device->add_subcommand("info", "Show one profile");
    std::string info_name, info_json;
    dev_info->add_option("name", info_name, "Device name or profile file")->required();
    dev_info->add_option("--json", info_json, "Write the profile as JSON to this file");

    // image
    auto* image = app.add_subcommand("image", "Generate firmware images");
    std::string img_kind = "random", img_device, img_out;
    uint64_t img_seed = 1;
    image->add_option("kind", img_kind, "random | structured | probe")
        ->check(CLI::IsMember({"random", "structured", "probe"}));
    image->add_option("--device", img_device, "Device name or profile file")->required();
    image->add_option("--seed", img_seed, "Seed");
    image->add_option("-o,--output", img_out, "Output file")->required();

    // flash
    auto* flash = app.add_subcommand("flash", "Provision a device and write a snapshot");
    std::string fl_image, fl_device, fl_out;
    int fl_rdp = 1;
    uint64_t fl_seed = 1;
    flash->add_option("image", fl_image, "Firmware image")->required();
    flash->add_option("--device", fl_device, "Device name or profile file")->required();
    flash->add_option("--rdp", fl_rdp, "Protection level 0, 1 or 2");
    flash->add_option("--seed", fl_seed, "Device seed");
    flash->add_option("-o,--output", fl_out, "Snapshot file (default: <out>/<device>.snap)");

    // attack
    auto* attack = app.add_subcommand("attack", "Run an extraction attack against a snapshot");
    std::string at_id, at_snap, at_out, at_line;
    AttackOptions opt;
    attack->add_option("id", at_id, "D0 D1A D1B D1C D2 H0 H1 H2 H3")->required();
    attack->add_option("--snapshot", at_snap, "Snapshot file")->required();
    attack->add_option("--out", at_out, "Output directory (default: $RDPSIM_OUT)");
    attack->add_option("--glitch-us", opt.glitch_us, "H3 glitch duration");
    attack->add_flag("--skip-glitch", opt.skip_glitch, "H3 without the glitch");
    attack->add_option("--attempts", opt.attempts, "H2 retries");
    attack->add_option("--injector-line", at_line, "H2 injector line (IO0..IO3)");
    attack->add_flag("--infer", opt.infer_matrices, "H1: infer matrices on a twin part");
    attack->add_flag("!--no-touch", opt.touch_all_pages, "H1: boot trace only");

    // trace
    auto* trace = app.add_subcommand("trace", "QSPI trace capture");
    trace->require_subcommand(1);
    auto* tr_cap = trace->add_subcommand("capture", "Capture the boot trace of a dual-die part");
    std::string tr_snap, tr_out;
    tr_cap->add_option("--snapshot", tr_snap, "Snapshot file")->required();
    tr_cap->add_option("-o,--output", tr_out, "Trace file (default: <out>/trace.json)");

    // deobf
    auto* deobf = app.add_subcommand("deobf", "Decode firmware from a QSPI trace");
    std::string de_trace, de_out, de_device;
    bool de_infer = false;
    deobf->add_option("--trace", de_trace, "Trace file")->required();
    deobf->add_flag("--infer", de_infer, "Infer the matrices on a blank unit of the part");
    deobf->add_option("--device", de_device, "Profile override (default: trace device)");
    deobf->add_option("-o,--output", de_out, "Image file (default: <out>/decoded.bin)");

    // coverage
    auto* coverage = app.add_subcommand("coverage", "Analytic exception-entry coverage");
    std::string cov_device, cov_json;
    coverage->add_option("--device", cov_device, "Device name or profile file")->required();
    coverage->add_option("--json", cov_json, "Write the readable-word bitmap to this file");

    // verify
    auto* verify = app.add_subcommand("verify", "Compare a recovered image to ground truth");
    std::string vf_report, vf_image;
    verify->add_option("--report", vf_report, "Report JSON")->required();
    verify->add_option("--image", vf_image, "Ground-truth image")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*dev_list) {
            for (auto d : all_devices())
                print_profile_summary(profile_for(d));
            return kExitOk;
        }
        if (*dev_info) {
            auto p = resolve_profile(info_name);
            print_profile_summary(p);
            std::cout << "  idcode " << hex32(p.idcode) << "  rdp levels";
            for (auto l : p.supported_rdp_levels)
                std::cout << ' ' << enum_name(l);
            std::cout << "\n  attacks";
            for (auto f : p.vuln_flags)
                std::cout << ' ' << enum_name(f);
            std::cout << "\n  policy rules " << p.policy.size() << '\n';
            if (!info_json.empty())
                write_json(info_json, nlohmann::json(p));
            return kExitOk;
        }
        if (*image) {
            auto p = resolve_profile(img_device);
            std::vector<uint8_t> bytes;
            if (img_kind == "random")
                bytes = random_victim_image(p, img_seed);
            else if (img_kind == "structured")
                bytes = structured_victim_image(p, img_seed);
            else
                bytes = inference_probe_image(p.flash_size,
                                              p.qspi_layout ? p.qspi_layout->page_size : 1024);
            write_file(img_out, bytes);
            std::cerr << "wrote " << bytes.size() << " bytes to " << img_out << '\n';
            return kExitOk;
        }
        if (*flash) {
            auto p = resolve_profile(fl_device);
            if (fl_rdp == 2 && !p.supports(Rdp::L2))
                std::cerr << "note: " << enum_name(p.name)
                          << " has no level 2; 0xCC33 decodes to level 1\n";
            Device d(p, fl_seed);
            d.provision(read_file(fl_image), raw_for_level(fl_rdp));
            if (fl_out.empty())
                fl_out = (fs::path(default_out()) / (enum_name(p.name) + ".snap")).string();
            if (auto parent = fs::path(fl_out).parent_path(); !parent.empty())
                fs::create_directories(parent);
            Snapshot::of(d).save(fl_out);
            std::cerr << "snapshot written to " << fl_out << '\n';
            return kExitOk;
        }
        if (*attack) {
            auto id = parse_enum<AttackId>(at_id, "attack");
            if (!at_line.empty()) {
                auto inj = h2_address_injector();
                inj.line = parse_enum<QspiLine>(at_line, "QSPI line");
                opt.injector = inj;
            }
            auto snap = Snapshot::load(at_snap);
            auto dev = snap.instantiate();
            dev->apply_power_event(PowerEvent::power_on());
            AttackRig rig(*dev);
            auto r = run_attack(id, rig, opt);
            if (at_out.empty())
                at_out = default_out();
            std::string stem = enum_name(r.device) + "_" + at_id;
            save_report(r, at_out, stem);
            std::cout << stem << ": " << enum_name(r.status) << ", coverage "
                      << pct(r.coverage_percent) << ", " << r.op_count << " ops\n";
            if (!r.detail.empty())
                std::cerr << r.detail << '\n';
            bool ok = r.status == AttackStatus::SUCCESS || r.status == AttackStatus::PARTIAL;
            return ok ? kExitOk : kExitAttackFailed;
        }
        if (*tr_cap) {
            auto snap = Snapshot::load(tr_snap);
            auto dev = snap.instantiate();
            dev->start_capture();
            dev->apply_power_event(PowerEvent::power_on());
            auto t = dev->stop_capture();
            if (tr_out.empty())
                tr_out = (fs::path(default_out()) / "trace.json").string();
            if (auto parent = fs::path(tr_out).parent_path(); !parent.empty())
                fs::create_directories(parent);
            save_trace(tr_out, t);
            std::cout << t.transactions.size() << " transactions captured\n";
            return kExitOk;
        }
        if (*deobf) {
            auto t = load_trace(de_trace);
            auto p = resolve_profile(de_device.empty() ? t.device : de_device);
            if (!p.qspi_layout || !p.obfuscation)
                throw UsageError("profile has no QSPI layout");
            ObfuscationKey key = p.obfuscation->key;
            if (de_infer) {
                Device twin(p, 1);
                twin.provision({}, kRdpRawL0);
                twin.apply_power_event(PowerEvent::power_on());
                key = infer_key_from_trace(capture_probe_trace(twin), *p.qspi_layout);
                std::cerr << "inferred matrices "
                          << (key == p.obfuscation->key ? "match" : "differ from") << " the profile\n";
            }
            auto fw = decode_firmware(t, *p.qspi_layout, p.flash_size, key);
            if (de_out.empty())
                de_out = (fs::path(default_out()) / "decoded.bin").string();
            write_file(de_out, fw.image);
            nlohmann::json side = {{"pages_present", fw.pages_present()},
                                   {"coverage_percent", fw.coverage_percent()},
                                   {"gaps", gaps_to_json(fw)}};
            if (de_infer)
                side["key"] = to_json(key);
            write_json(de_out + ".gaps.json", side);
            std::cout << fw.pages_present() << " pages decoded, coverage " << pct(fw.coverage_percent())
                      << '\n';
            return kExitOk;
        }
        if (*coverage) {
            auto p = resolve_profile(cov_device);
            auto c = compute_coverage(p);
            std::cout << enum_name(p.name) << ": " << pct(c.percent) << " ("
                      << c.readable_words << "/" << c.total_words << " words)\n";
            if (!cov_json.empty()) {
                std::string bits;
                for (bool b : c.readable)
                    bits += b ? '1' : '0';
                write_json(cov_json, {{"device", p.name},
                                      {"percent", c.percent},
                                      {"readable_words", c.readable_words},
                                      {"total_words", c.total_words},
                                      {"bitmap", bits}});
            }
            return kExitOk;
        }
        if (*verify) {
            std::ifstream jf(vf_report);
            if (!jf)
                throw UsageError("cannot read " + vf_report);
            auto j = nlohmann::json::parse(jf);
            auto rec = read_file((fs::path(vf_report).parent_path() / j.at("image").get<std::string>()).string());
            auto truth = read_file(vf_image);
            const auto& bits = j.at("valid_bitmap").get_ref<const std::string&>();
            truth.resize(rec.size(), 0xFF);
            size_t valid = 0, mismatch = 0;
            for (size_t w = 0; w < bits.size() && 4 * w + 4 <= rec.size(); ++w) {
                if (bits[w] != '1')
                    continue;
                ++valid;
                if (!std::equal(rec.begin() + 4 * w, rec.begin() + 4 * w + 4, truth.begin() + 4 * w))
                    ++mismatch;
            }
            double cov = bits.empty() ? 0.0 : 100.0 * double(valid) / double(bits.size());
            std::cout << "coverage " << pct(cov) << " (" << valid << "/" << bits.size()
                      << " words), mismatches " << mismatch << '\n';
            return mismatch == 0 ? kExitOk : kExitAttackFailed;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitAttackFailed;
    }
    return kExitUsage;
}

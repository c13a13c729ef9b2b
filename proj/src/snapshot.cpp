#include "rdpsim/snapshot.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

namespace rdpsim {

namespace {

void put32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(uint8_t(v >> (8 * i)));
}

uint32_t get32(const std::vector<uint8_t>& in, size_t at) {
    if (at + 4 > in.size())
        throw ConfigError("snapshot truncated");
    return read_le32(in, at);
}

}  // namespace

Snapshot Snapshot::of(const Device& d) {
    Snapshot s;
    s.profile = d.profile();
    s.seed = d.seed();
    s.option_raw = d.stored_option_raw();
    s.boot_pins = d.boot_pins();
    s.flash = d.flash();
    s.sram = d.sram();
    s.bootloader = d.bootloader();
    return s;
}

std::unique_ptr<Device> Snapshot::instantiate() const {
    auto d = std::make_unique<Device>(profile, seed);
    if (d->bootloader() != bootloader)
        throw ConfigError("snapshot bootloader does not match the profile");
    d->provision(flash, option_raw);
    d->sram_mut() = sram;
    d->set_boot_pins(boot_pins);
    return d;
}

std::vector<uint8_t> Snapshot::serialize() const {
    nlohmann::json h;
    h["profile"] = profile;
    h["seed"] = seed;
    h["option_raw"] = option_raw;
    h["boot_pins"] = boot_pins;
    h["sections"] = nlohmann::json::array({
        {{"name", "flash"}, {"size", flash.size()}},
        {{"name", "sram"}, {"size", sram.size()}},
        {{"name", "bootloader"}, {"size", bootloader.size()}},
    });
    std::string header = h.dump();

    std::vector<uint8_t> out(std::begin(kSnapshotMagic), std::end(kSnapshotMagic));
    put32(out, kSnapshotVersion);
    put32(out, uint32_t(header.size()));
    out.insert(out.end(), header.begin(), header.end());
    for (const auto* sec : {&flash, &sram, &bootloader})
        out.insert(out.end(), sec->begin(), sec->end());
    return out;
}

Snapshot Snapshot::deserialize(const std::vector<uint8_t>& in) {
    if (in.size() < 16 || std::memcmp(in.data(), kSnapshotMagic, 8) != 0)
        throw ConfigError("not a snapshot file");
    uint32_t version = get32(in, 8);
    if (version != kSnapshotVersion)
        throw ConfigError("unsupported snapshot version " + std::to_string(version));
    uint32_t hlen = get32(in, 12);
    if (16 + size_t(hlen) > in.size())
        throw ConfigError("snapshot truncated");
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(in.begin() + 16, in.begin() + 16 + hlen);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad snapshot header: ") + e.what());
    }

    Snapshot s;
    try {
        s.profile = h.at("profile").get<DeviceProfile>();
        s.seed = h.at("seed").get<uint64_t>();
        s.option_raw = h.at("option_raw").get<uint16_t>();
        s.boot_pins = h.at("boot_pins").get<BootMode>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad snapshot header: ") + e.what());
    }
    size_t at = 16 + hlen;
    for (const auto& sec : h.at("sections")) {
        auto name = sec.at("name").get<std::string>();
        auto size = sec.at("size").get<size_t>();
        if (at + size > in.size())
            throw ConfigError("snapshot section " + name + " truncated");
        std::vector<uint8_t> data(in.begin() + at, in.begin() + at + size);
        at += size;
        if (name == "flash")
            s.flash = std::move(data);
        else if (name == "sram")
            s.sram = std::move(data);
        else if (name == "bootloader")
            s.bootloader = std::move(data);
        // unknown sections from newer writers are skipped
    }
    if (s.flash.size() != s.profile.flash_size || s.sram.size() != s.profile.sram_size)
        throw ConfigError("snapshot memory sizes do not match the profile");
    return s;
}

void Snapshot::save(const std::string& path) const {
    auto bytes = serialize();
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw ConfigError("cannot write " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

Snapshot Snapshot::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw ConfigError("cannot read " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

}  // namespace rdpsim

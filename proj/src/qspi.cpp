#include "rdpsim/qspi.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rdpsim {

std::vector<uint8_t> expand_address(uint32_t address) {
    std::vector<uint8_t> n(kAddressNibbles);
    for (int i = 0; i < kAddressNibbles; ++i)
        n[i] = (address >> (4 * (kAddressNibbles - 1 - i))) & 0xF;
    return n;
}

std::vector<uint8_t> encode_nibbles(uint8_t command, uint32_t address, uint32_t dummy,
                                    const std::vector<uint8_t>& data) {
    std::vector<uint8_t> n;
    n.reserve(data_phase_start(dummy) + 2 * data.size());
    n.push_back(command >> 4);
    n.push_back(command & 0xF);
    for (uint8_t a : expand_address(address))
        n.push_back(a);
    n.insert(n.end(), dummy, 0);
    for (uint8_t b : data) {
        n.push_back(b >> 4);
        n.push_back(b & 0xF);
    }
    return n;
}

QspiTransaction decode_nibbles(const std::vector<uint8_t>& nibbles, uint32_t dummy) {
    size_t data_at = data_phase_start(dummy);
    if (nibbles.size() < data_at || (nibbles.size() - data_at) % 2)
        throw std::invalid_argument("nibble stream length does not frame a transaction");
    for (uint8_t v : nibbles)
        if (v > 0xF)
            throw std::invalid_argument("nibble value out of range");
    QspiTransaction t;
    t.command = uint8_t(nibbles[0] << 4 | nibbles[1]);
    for (int i = 0; i < kAddressNibbles; ++i)
        t.address = (t.address << 4) | nibbles[kCommandNibbles + i];
    t.dummy_cycles = dummy;
    for (size_t i = data_at; i < nibbles.size(); i += 2)
        t.data.push_back(uint8_t(nibbles[i] << 4 | nibbles[i + 1]));
    t.nibbles = nibbles;
    return t;
}

FaultInjector h2_address_injector() {
    FaultInjector inj;
    inj.line = QspiLine::IO2;
    inj.trigger = FaultTrigger{};
    // 0x004000 -> 0x000400: IO2 high in address nibble 4 instead of nibble 3.
    inj.override_bits = {0, 0, 0, 1, 0, 0};
    return inj;
}

void QspiBus::arm(const FaultInjector& inj) {
    if (inj.override_bits.empty())
        throw ConfigError("injector needs at least one override bit");
    for (uint8_t b : inj.override_bits)
        if (b > 1)
            throw ConfigError("override bits must be 0 or 1");
    injector_ = inj;
    begin_boot();
}

void QspiBus::disarm() {
    injector_.reset();
    begin_boot();
}

void QspiBus::begin_boot() {
    runs_.clear();
    fired_ = false;
    pending_ = false;
    overriding_ = false;
    countdown_ = 0;
    override_pos_ = 0;
}

void QspiBus::observe(bool level) {
    if (!runs_.empty() && runs_.back().first == level) {
        ++runs_.back().second;
        return;
    }
    runs_.emplace_back(level, 1);
    const auto& t = injector_->trigger;
    size_t keep = 2 * t.ones_blocks + 2;
    if (runs_.size() > keep)
        runs_.erase(runs_.begin(), runs_.end() - keep);
    if (level || t.ones_blocks == 0)
        return;
    // Falling edge: check Z, O, (G, O)* ending just before this cycle.
    size_t n = runs_.size();
    if (n < keep)
        return;
    for (uint32_t k = 0; k < t.ones_blocks; ++k) {
        if (!runs_[n - 2 - 2 * k].first)
            return;
        if (k + 1 < t.ones_blocks && runs_[n - 3 - 2 * k].second > t.max_gap)
            return;
    }
    const auto& z = runs_[n - 1 - 2 * t.ones_blocks];
    if (z.first || z.second < t.min_zero_run)
        return;
    pending_ = true;
    countdown_ = t.delay_cycles;
}

uint8_t QspiBus::drive(uint8_t nibble) {
    if (!injector_)
        return nibble;
    const auto& inj = *injector_;
    if (!fired_ && !pending_)
        observe((nibble >> static_cast<int>(inj.monitored())) & 1);
    if (pending_) {
        if (countdown_ == 0) {
            pending_ = false;
            fired_ = true;
            overriding_ = true;
            override_pos_ = 0;
        } else {
            --countdown_;
        }
    }
    if (overriding_) {
        int l = static_cast<int>(inj.line);
        uint8_t bit = inj.override_bits[override_pos_++];
        nibble = uint8_t((nibble & ~(1u << l)) | (uint32_t(bit) << l));
        if (override_pos_ == inj.override_bits.size())
            overriding_ = false;
    }
    return nibble;
}

QspiTransaction qspi_transfer(QspiBus& bus, const FlashDieImage& die, uint8_t command,
                              uint32_t address, uint32_t dummy, uint32_t length) {
    QspiTransaction t;
    t.dummy_cycles = dummy;
    t.nibbles.reserve(data_phase_start(dummy) + 2 * size_t(length));
    auto put = [&](uint8_t v) {
        uint8_t w = bus.drive(v);
        t.nibbles.push_back(w);
        return w;
    };
    uint8_t hi = put(command >> 4);
    uint8_t lo = put(command & 0xF);
    t.command = uint8_t(hi << 4 | lo);
    for (uint8_t a : expand_address(address))
        t.address = (t.address << 4) | put(a);
    for (uint32_t i = 0; i < dummy; ++i)
        put(0);
    bool understood = t.command == command;
    t.data.reserve(length);
    for (uint32_t i = 0; i < length; ++i) {
        uint8_t b = understood ? die.read_byte((t.address + i) & 0xFFFFFF) : 0xFF;
        uint8_t h = put(b >> 4);
        uint8_t l = put(b & 0xF);
        t.data.push_back(uint8_t(h << 4 | l));
    }
    return t;
}

std::vector<uint8_t> factory_config_blob(uint32_t size) {
    std::vector<uint8_t> b(size, 0xFF);
    const uint8_t head[8] = {0xA5, 0x5A, 0x07, 0xEF, 0x10, 0x04, 0x03, 0x13};
    for (uint32_t i = 0; i < 8 && i < size; ++i)
        b[i] = head[i];
    return b;
}

namespace {

const ObfuscationKey& key_of(const DeviceProfile& profile) {
    if (!profile.obfuscation)
        throw ConfigError(enum_name(profile.name) + " has no inter-die obfuscation");
    return profile.obfuscation->key;
}

void check_page(uint32_t page_index, const DeviceProfile& profile) {
    if (page_index >= profile.page_count())
        throw ConfigError("page index " + std::to_string(page_index) + " outside flash");
}

}  // namespace

std::vector<uint8_t> obfuscate_page(uint32_t page_index, const std::vector<uint8_t>& logical,
                                    const DeviceProfile& profile) {
    check_page(page_index, profile);
    return obfuscate_page_bytes(key_of(profile), logical);
}

std::vector<uint8_t> deobfuscate_page(uint32_t page_index, const std::vector<uint8_t>& physical,
                                      const DeviceProfile& profile) {
    check_page(page_index, profile);
    return deobfuscate_page_bytes(key_of(profile), physical);
}

// ---- trace file ----------------------------------------------------------

namespace {

constexpr const char* kTraceFormat = "rdpsim-qspi-trace";
constexpr int kTraceVersion = 1;

std::string to_hex(const std::vector<uint8_t>& bytes) {
    static const char* d = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (uint8_t b : bytes) {
        s += d[b >> 4];
        s += d[b & 0xF];
    }
    return s;
}

std::vector<uint8_t> from_hex(const std::string& s) {
    if (s.size() % 2)
        throw std::invalid_argument("odd-length hex string");
    std::vector<uint8_t> out(s.size() / 2);
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<uint8_t>(std::stoul(s.substr(2 * i, 2), nullptr, 16));
    return out;
}

}  // namespace

void write_trace(std::ostream& out, const QspiTrace& trace) {
    nlohmann::json header = {{"format", kTraceFormat},
                             {"version", kTraceVersion},
                             {"device", trace.device},
                             {"clock_mhz", trace.clock_mhz}};
    out << header.dump() << '\n';
    for (const auto& t : trace.transactions) {
        nlohmann::json rec = {{"command", t.command},
                              {"address", t.address},
                              {"dummy_cycles", t.dummy_cycles},
                              {"data_hex", to_hex(t.data)},
                              {"nibbles", t.nibbles}};
        out << rec.dump() << '\n';
    }
}

QspiTrace read_trace(std::istream& in) {
    QspiTrace trace;
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("empty trace file");
    try {
        auto header = nlohmann::json::parse(line);
        if (header.at("format") != kTraceFormat)
            throw ConfigError("not a QSPI trace file");
        if (header.at("version").get<int>() != kTraceVersion)
            throw ConfigError("unsupported trace version");
        trace.device = header.at("device").get<std::string>();
        trace.clock_mhz = header.at("clock_mhz").get<double>();
        size_t number = 1;
        while (std::getline(in, line)) {
            ++number;
            if (line.empty())
                continue;
            auto rec = nlohmann::json::parse(line);
            auto nibbles = rec.at("nibbles").get<std::vector<uint8_t>>();
            auto t = decode_nibbles(nibbles, rec.at("dummy_cycles").get<uint32_t>());
            if (t.command != rec.at("command").get<uint8_t>() ||
                t.address != rec.at("address").get<uint32_t>() ||
                t.data != from_hex(rec.at("data_hex").get<std::string>()))
                throw ConfigError("trace record " + std::to_string(number) +
                                  " fields disagree with its nibble stream");
            trace.transactions.push_back(std::move(t));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed trace: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("malformed trace: ") + e.what());
    }
    return trace;
}

void save_trace(const std::string& path, const QspiTrace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write " + path);
    write_trace(out, trace);
}

QspiTrace load_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open " + path);
    return read_trace(in);
}

std::vector<uint8_t> line_bits(const std::vector<uint8_t>& nibbles, QspiLine line) {
    std::vector<uint8_t> bits(nibbles.size());
    for (size_t i = 0; i < nibbles.size(); ++i)
        bits[i] = (nibbles[i] >> static_cast<int>(line)) & 1;
    return bits;
}

}  // namespace rdpsim

#include <random>

#include "rdpsim/exploits.hpp"

namespace rdpsim {

namespace {

std::string hex_bytes(const std::vector<uint8_t>& b) {
    static const char* d = "0123456789abcdef";
    std::string s;
    s.reserve(2 * b.size());
    for (uint8_t v : b) {
        s += d[v >> 4];
        s += d[v & 0xF];
    }
    return s;
}

}  // namespace

AttackRig::AttackRig(Device& target) : dev_(target) {}

DebugSession AttackRig::attach() {
    return DebugSession::attach(dev_, &transcript_);
}

void AttackRig::note(const std::string& what, nlohmann::json detail) {
    transcript_.add("note", {{"text", what}}, std::move(detail));
}

void AttackRig::physical(const std::string& op, nlohmann::json args) {
    transcript_.add(op, std::move(args), {{"status", "OK"}});
}

void AttackRig::power_off() {
    dev_.apply_power_event(PowerEvent::power_off());
    physical("power_off");
}

void AttackRig::power_on() {
    dev_.apply_power_event(PowerEvent::power_on());
    physical("power_on");
}

void AttackRig::power_cycle() {
    dev_.apply_power_event(PowerEvent::power_off());
    dev_.apply_power_event(PowerEvent::power_on());
    physical("power_cycle");
}

void AttackRig::glitch(uint32_t duration_us) {
    dev_.apply_power_event(PowerEvent::glitch(duration_us));
    physical("glitch", {{"duration_us", duration_us}});
}

void AttackRig::reset_pulse() {
    dev_.apply_power_event(PowerEvent::reset_pulse());
    physical("reset_pulse");
}

void AttackRig::set_boot_pins(BootMode mode) {
    dev_.set_boot_pins(mode);
    physical("set_boot_pins", {{"mode", mode}});
}

void AttackRig::run(uint64_t cycles) {
    dev_.tick(cycles);
    physical("run", {{"cycles", cycles}});
}

std::vector<uint8_t> AttackRig::uart_read() {
    auto bytes = dev_.uart_drain();
    transcript_.add("uart_read", nlohmann::json::object(), {{"hex", hex_bytes(bytes)}});
    return bytes;
}

DmaReport AttackRig::dma_copy(DebugSession& s, uint32_t src, uint32_t dst, uint32_t words) {
    s.mem_write(reg::DMA_CTRL, 0);
    s.mem_write(reg::DMA_SRC, src);
    s.mem_write(reg::DMA_DST, dst);
    s.mem_write(reg::DMA_COUNT, words);
    s.mem_write(reg::DMA_CTRL, 1);
    DmaReport rep;
    for (int polls = 0;; ++polls) {
        auto st = s.mem_read(reg::DMA_STATUS);
        if (!st.ok())
            return rep;
        rep.state = static_cast<DmaState>(*st.data & 3);
        if (rep.state != DmaState::RUNNING || polls > 64)
            break;
        run(words);
    }
    auto done = s.mem_read(reg::DMA_DONE);
    rep.words_done = done.ok() ? *done.data : 0;
    if (rep.state == DmaState::FAULTED)
        rep.fault_word = rep.words_done;
    return rep;
}

void AttackRig::start_capture() {
    dev_.start_capture();
    physical("start_capture");
}

QspiTrace AttackRig::stop_capture() {
    auto t = dev_.stop_capture();
    physical("stop_capture", {{"transactions", t.transactions.size()}});
    return t;
}

void AttackRig::arm_injector(const FaultInjector& inj) {
    if (!dev_.profile().dual_die)
        throw ConfigError("no inter-die bus to inject on");
    dev_.qspi_bus().arm(inj);
    physical("arm_injector", {{"line", inj.line}});
}

void AttackRig::disarm_injector() {
    dev_.qspi_bus().disarm();
    physical("disarm_injector");
}

std::unique_ptr<Device> AttackRig::make_twin() const {
    auto twin = std::make_unique<Device>(dev_.profile(), dev_.seed() ^ 0x7715);
    twin->provision({}, kRdpRawL0);
    twin->apply_power_event(PowerEvent::power_on());
    return twin;
}

// ---- test images -------------------------------------------------------------

std::vector<uint8_t> random_victim_image(const DeviceProfile& p, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<uint8_t> img(p.flash_size);
    for (size_t i = 0; i < img.size(); i += 8) {
        uint64_t v = rng();
        for (size_t k = 0; k < 8 && i + k < img.size(); ++k)
            img[i + k] = uint8_t(v >> (8 * k));
    }
    write_le32(img, 0, kSramBase + p.sram_size);
    write_le32(img, 4, (kFlashBase + 8) | 1);
    // Idle loop at reset entry: BRANCH to itself.
    uint8_t loop[8] = {uint8_t(0x05), 0, 0, 0, 0, 0, 0, 0};
    uint32_t target = kFlashBase + 8;
    for (int i = 0; i < 4; ++i)
        loop[4 + i] = uint8_t(target >> (8 * i));
    std::copy(loop, loop + 8, img.begin() + 8);
    return img;
}

std::vector<uint8_t> structured_victim_image(const DeviceProfile& p, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<uint8_t> img(p.flash_size, 0xFF);
    uint32_t entries = p.vector_table_entries();
    uint32_t code = (4 * entries + 0xFF) & ~0xFFu;
    write_le32(img, 0, kSramBase + p.sram_size);
    write_le32(img, 4, (kFlashBase + code) | 1);
    uint32_t default_handler = kFlashBase + code + 8;
    for (uint32_t i = 2; i < entries; ++i)
        write_le32(img, 4 * i, (rng() % 4 ? default_handler : kFlashBase + code + 16 * (i % 8)) | 1);
    // Code-like body: repeating short instruction sequences with small
    // immediates, then a literal pool; 3/4 of flash used, rest erased.
    uint32_t end = p.flash_size / 4 * 3;
    uint32_t at = code;
    img[at] = 0x05;  // reset: idle loop
    img[at + 1] = img[at + 2] = img[at + 3] = 0;
    write_le32(img, at + 4, kFlashBase + code);
    at += 8;
    while (at + 8 <= end) {
        uint8_t op = uint8_t(1 + rng() % 7);
        img[at] = op;
        img[at + 1] = uint8_t(rng() % 13);
        img[at + 2] = uint8_t(rng() % 13);
        img[at + 3] = 0;
        uint32_t imm = rng() % 3 ? uint32_t(rng() % 256) : kFlashBase + uint32_t(rng() % end);
        write_le32(img, at + 4, imm);
        at += 8;
    }
    return img;
}

}  // namespace rdpsim

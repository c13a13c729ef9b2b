#include <map>

#include "rdpsim/device.hpp"

namespace rdpsim {

constexpr uint8_t kSramErased = 0x00;

// The flash die of a dual-die part, as seen from its QSPI pins. Firmware is
// stored in bus (obfuscated) order; everything else is stored plainly.
class FlashDie : public FlashDieImage {
public:
    explicit FlashDie(const Device& d) : d_(d), layout_(*d.profile_.qspi_layout) {
        factory_ = factory_config_blob(layout_.factory_config_size);
    }

    uint8_t read_byte(uint32_t a) const override {
        const auto& L = layout_;
        if (a >= L.factory_config_addr && a - L.factory_config_addr < L.factory_config_size)
            return factory_[a - L.factory_config_addr];
        if (a >= L.bootloader_addr && a - L.bootloader_addr < d_.bootloader_.size())
            return d_.bootloader_[a - L.bootloader_addr];
        if (a >= L.option_bytes_addr && a - L.option_bytes_addr < L.option_bytes_size) {
            uint32_t i = a - L.option_bytes_addr;
            if (i == 0)
                return uint8_t(d_.option_raw_ >> 8);
            if (i == 1)
                return uint8_t(d_.option_raw_);
            return 0xFF;
        }
        if (a >= L.firmware_base && a - L.firmware_base < d_.flash_.size()) {
            uint32_t off = a - L.firmware_base;
            return page(off / L.page_size)[off % L.page_size];
        }
        return 0xFF;
    }

private:
    const std::vector<uint8_t>& page(uint32_t index) const {
        auto it = pages_.find(index);
        if (it != pages_.end())
            return it->second;
        auto first = d_.flash_.begin() + size_t(index) * layout_.page_size;
        std::vector<uint8_t> logical(first, first + layout_.page_size);
        return pages_[index] = obfuscate_page(index, logical, d_.profile_);
    }

    const Device& d_;
    QspiLayout layout_;
    std::vector<uint8_t> factory_;
    mutable std::map<uint32_t, std::vector<uint8_t>> pages_;
};

void Device::clear_volatile(bool keep_sram) {
    if (!keep_sram)
        std::fill(sram_.begin(), sram_.end(), kSramErased);
    core_ = CoreState{};
    fpb_ = FpbConfig{};
    dma_ = DmaChannel{};
    uart_.clear();
    fetched_.assign(profile_.page_count(), false);
    debugger_attached_ = false;
    c_debugen_ever_set_ = false;
    flash_lockdown_ = false;
    exec_override_ = ExecFrom::NONE;
    stepping_ = false;
}

void Device::power_on_boot() {
    powered_ = true;
    ++power_epoch_;
    load_option_bytes();
    reset();
}

void Device::apply_power_event(const PowerEvent& ev) {
    switch (ev.kind) {
    case PowerEvent::Kind::POWER_ON:
        if (powered_)
            return;
        clear_volatile(false);
        power_on_boot();
        return;
    case PowerEvent::Kind::POWER_OFF:
        if (!powered_)
            return;
        powered_ = false;
        ++power_epoch_;
        clear_volatile(false);
        reset_line_.push_back({clock_us_, false});
        return;
    case PowerEvent::Kind::GLITCH: {
        if (ev.duration_us == 0)
            throw ConfigError("glitch duration must be positive");
        bool was_powered = powered_;
        powered_ = false;
        clear_volatile(was_powered && ev.duration_us <= profile_.sram_remanence_us);
        clock_us_ += ev.duration_us;
        power_on_boot();
        return;
    }
    case PowerEvent::Kind::RESET_PULSE:
        if (!powered_)
            throw ProtocolError("reset pulse on an unpowered device");
        reset();
        return;
    }
}

uint16_t Device::qspi_boot() {
    const auto& L = *profile_.qspi_layout;
    FlashDie die(*this);
    qspi_.begin_boot();
    auto run = [&](uint32_t addr, uint32_t len) {
        auto t = qspi_transfer(qspi_, die, L.command, addr, L.dummy_cycles, len);
        clock_us_ += uint64_t(t.nibbles.size() / L.clock_mhz);
        if (capturing_)
            captured_.push_back(t);
        return t;
    };
    run(L.factory_config_addr, L.factory_config_size);
    run(L.bootloader_addr, uint32_t(bootloader_.size()));
    auto ob = run(L.option_bytes_addr, L.option_bytes_size);
    uint32_t pages = std::min(L.initial_fetch, profile_.flash_size) / L.page_size;
    for (uint32_t p = 0; p < pages; ++p) {
        run(L.firmware_base + p * L.page_size, L.page_size);
        fetched_[p] = true;
    }
    return uint16_t(ob.data[0] << 8 | ob.data[1]);
}

void Device::qspi_fetch_page(uint32_t page) {
    const auto& L = *profile_.qspi_layout;
    FlashDie die(*this);
    auto t = qspi_transfer(qspi_, die, L.command, L.firmware_base + page * L.page_size,
                           L.dummy_cycles, L.page_size);
    clock_us_ += uint64_t(t.nibbles.size() / L.clock_mhz);
    if (capturing_)
        captured_.push_back(std::move(t));
    fetched_[page] = true;
}

void Device::ensure_page_fetched(uint32_t offset) {
    if (!profile_.dual_die)
        return;
    uint32_t page = offset / profile_.qspi_layout->page_size;
    if (page < fetched_.size() && !fetched_[page])
        qspi_fetch_page(page);
}

bool Device::page_fetched(uint32_t page) const {
    return page < fetched_.size() && fetched_[page];
}

void Device::start_capture() {
    if (!profile_.dual_die)
        throw ConfigError(enum_name(profile_.name) + " has no inter-die QSPI link");
    capturing_ = true;
    captured_.clear();
}

QspiTrace Device::stop_capture() {
    QspiTrace t;
    t.device = enum_name(profile_.name);
    t.clock_mhz = profile_.qspi_layout ? profile_.qspi_layout->clock_mhz : 4.0;
    t.transactions = std::move(captured_);
    captured_.clear();
    capturing_ = false;
    return t;
}

}  // namespace rdpsim

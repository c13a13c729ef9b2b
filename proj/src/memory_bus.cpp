#include "rdpsim/device.hpp"

#include <random>
#include <stdexcept>

#include "rdpsim/micro_isa.hpp"

namespace rdpsim {

namespace {

bool in_range(uint32_t a, uint32_t base, uint32_t size) {
    return a >= base && a - base < size;
}

uint64_t bootloader_family_seed(DeviceName n) {
    // STM32/APM/CKS ship a copied system-memory image; the GD parts do not.
    switch (n) {
    case DeviceName::STM32F103:
    case DeviceName::APM32F103:
    case DeviceName::CKS32F103: return 0x53544D3146313033ull;
    case DeviceName::GD32F103: return 0x4744463130330001ull;
    case DeviceName::GD32F130: return 0x4744463133300001ull;
    case DeviceName::GD32VF103: return 0x4744564631303301ull;
    }
    return 0;
}

}  // namespace

bool rule_matches(const PolicyRule& rule, Master m, Access a, Region r, const AccessContext& ctx) {
    if (rule.masters && !(rule.masters & bit_of(m)))
        return false;
    if (rule.accesses && !(rule.accesses & bit_of(a)))
        return false;
    if (rule.regions && !(rule.regions & bit_of(r)))
        return false;
    if (rule.executing_from && !(rule.executing_from & bit_of(ctx.executing_from)))
        return false;
    if (ctx.rdp.level < rule.min_rdp || ctx.rdp.level > rule.max_rdp)
        return false;
    if (rule.debugger_attached && *rule.debugger_attached != ctx.debugger_attached)
        return false;
    if (rule.c_debugen_ever_set && *rule.c_debugen_ever_set != ctx.c_debugen_ever_set)
        return false;
    if (rule.flash_lockdown && *rule.flash_lockdown != ctx.flash_lockdown)
        return false;
    if (rule.boot_mode && *rule.boot_mode != ctx.boot_mode)
        return false;
    return true;
}

const PolicyRule* match_rule(const std::vector<PolicyRule>& rules, Master m, Access a, Region r,
                             const AccessContext& ctx) {
    for (const auto& rule : rules)
        if (rule_matches(rule, m, a, r, ctx))
            return &rule;
    return nullptr;
}

Verdict evaluate_policy(const std::vector<PolicyRule>& rules, Master m, Access a, Region r,
                        const AccessContext& ctx) {
    const PolicyRule* rule = match_rule(rules, m, a, r, ctx);
    return rule ? rule->verdict : Verdict::DENY;
}

Resolved resolve_address(const DeviceProfile& p, BootMode boot_mode, uint32_t a) {
    if (boot_mode == BootMode::FLASH && a < p.flash_size)
        return {Region::FLASH, a};
    if (boot_mode == BootMode::SRAM && a < p.sram_size)
        return {Region::SRAM, a};
    if (in_range(a, kFlashBase, p.flash_size))
        return {Region::FLASH, a - kFlashBase};
    if (in_range(a, kSramBase, p.sram_size))
        return {Region::SRAM, a - kSramBase};
    if (in_range(a, p.bootloader_base, p.bootloader_size))
        return {Region::BOOTLOADER, a - p.bootloader_base};
    if (in_range(a, kOptionBytesBase, kOptionBytesSize))
        return {Region::OPTION_BYTES, a - kOptionBytesBase};
    if (a >= kPeripheralBase && a < kPeripheralEnd)
        return {Region::PERIPHERAL, a - kPeripheralBase};
    if (a >= reg::DEBUG_CONTROL_BASE && a < reg::DEBUG_CONTROL_END)
        return {Region::DEBUG_CONTROL, a - kSystemBase};
    if (a >= kSystemBase && a < reg::SYSTEM_END)
        return {Region::SYSTEM, a - kSystemBase};
    return {Region::UNMAPPED, 0};
}

bool FpbConfig::empty() const {
    if (enabled)
        return false;
    for (const auto& c : comparators)
        if (c.enabled || c.match_address || c.replacement_value)
            return false;
    return true;
}

// ---- construction / provisioning -------------------------------------------

Device::Device(DeviceProfile profile, uint64_t seed)
    : profile_(std::move(profile)), seed_(seed) {
    flash_.assign(profile_.flash_size, 0xFF);
    sram_.assign(profile_.sram_size, 0x00);
    fetched_.assign(profile_.page_count(), false);
    rdp_ = decode_rdp(option_raw_, profile_);
    build_bootloader();
}

void Device::build_bootloader() {
    std::mt19937_64 rng(bootloader_family_seed(profile_.name));
    bootloader_.resize(profile_.bootloader_size);
    for (auto& b : bootloader_)
        b = static_cast<uint8_t>(rng() >> 56);
    // Word-load gadget, 8-byte aligned in the middle of the image.
    gadget_offset_ = (profile_.bootloader_size / 2) & ~7u;
    auto g = encode(Instr{Op::LOAD_WORD, 1, 0, 0});
    std::copy(g.begin(), g.end(), bootloader_.begin() + gadget_offset_);
    // Tail: long zero run, then three blocks of ones on IO2 (nibble bit 2).
    const uint8_t blocks[8] = {0x44, 0x44, 0x00, 0x44, 0x44, 0x00, 0x44, 0x44};
    size_t tail = profile_.bootloader_size - 40;
    std::fill(bootloader_.begin() + tail, bootloader_.begin() + tail + 32, 0x00);
    std::copy(blocks, blocks + 8, bootloader_.begin() + tail + 32);
}

void Device::provision(const std::vector<uint8_t>& image, uint16_t option_raw) {
    if (image.size() > flash_.size())
        throw ConfigError("image larger than flash");
    std::fill(flash_.begin(), flash_.end(), 0xFF);
    std::copy(image.begin(), image.end(), flash_.begin());
    option_raw_ = option_raw;
}

void Device::mass_erase() {
    std::fill(flash_.begin(), flash_.end(), 0xFF);
}

// ---- bus -------------------------------------------------------------------

AccessContext Device::context(ExecFrom executing_from) const {
    AccessContext c;
    c.rdp = rdp_;
    c.debugger_attached = debugger_attached_;
    c.c_debugen_ever_set = c_debugen_ever_set_;
    c.flash_lockdown = flash_lockdown_;
    c.boot_mode = boot_mode_;
    c.executing_from = executing_from;
    return c;
}

BusResponse Device::bus_access(const BusRequest& req) {
    if (!powered_)
        throw ProtocolError("bus access on an unpowered device");
    bool fetch = req.access == Access::VECTOR_FETCH || req.access == Access::INSTR_FETCH;
    if (fetch != (req.master == Master::CPU_INSTR))
        throw std::invalid_argument("fetches travel on the instruction bus only");
    if (req.width != 1 && req.width != 2 && req.width != 4)
        throw std::invalid_argument("bus width must be 1, 2 or 4");
    if (req.address % req.width)
        throw std::invalid_argument("unaligned bus access");
    if (req.access == Access::VECTOR_FETCH && req.width != 4)
        throw std::invalid_argument("vector fetches are word-sized");

    BusResponse resp;
    Resolved where = resolve_address(profile_, boot_mode_, req.address);
    resp.region = where.region;
    if (where.region == Region::UNMAPPED) {
        resp.status = BusStatus::UNMAPPED;
        return resp;
    }
    if (where.region == Region::FLASH && req.master != Master::DEBUGGER)
        ensure_page_fetched(where.offset);

    Verdict v = evaluate_policy(profile_.policy, req.master, req.access, where.region,
                                context(executing_from()));
    if (v == Verdict::DENY) {
        resp.status = BusStatus::DENIED;
        return resp;
    }
    if (v == Verdict::LOCKDOWN_TRIGGER)
        flash_lockdown_ = true;

    if (req.access == Access::DATA_WRITE) {
        if (where.region == Region::FLASH || where.region == Region::BOOTLOADER ||
            where.region == Region::OPTION_BYTES) {
            resp.status = BusStatus::DENIED;
            return resp;
        }
        store(where, req.address, req.width, req.value, req.master);
        resp.status = BusStatus::OK;
        return resp;
    }
    resp.data = load(where, req.address, req.width);
    resp.status = resp.data ? BusStatus::OK : BusStatus::UNMAPPED;
    return resp;
}

std::optional<uint32_t> Device::load(Resolved where, uint32_t address, uint8_t width) {
    auto from = [&](const std::vector<uint8_t>& m) {
        uint32_t v = 0;
        for (int i = width - 1; i >= 0; --i)
            v = (v << 8) | m[where.offset + i];
        return v;
    };
    switch (where.region) {
    case Region::FLASH: return from(flash_);
    case Region::SRAM: return from(sram_);
    case Region::BOOTLOADER: return from(bootloader_);
    case Region::OPTION_BYTES: {
        std::vector<uint8_t> ob(kOptionBytesSize, 0xFF);
        ob[0] = uint8_t(option_raw_ >> 8);
        ob[1] = uint8_t(option_raw_);
        return from(ob);
    }
    case Region::PERIPHERAL:
    case Region::SYSTEM:
    case Region::DEBUG_CONTROL: {
        uint32_t word = mmio_read(address & ~3u);
        uint32_t shift = 8 * (address & 3);
        uint32_t mask = width == 4 ? 0xFFFFFFFFu : ((1u << (8 * width)) - 1);
        return (word >> shift) & mask;
    }
    default: return std::nullopt;
    }
}

void Device::store(Resolved where, uint32_t address, uint8_t width, uint32_t value, Master m) {
    if (where.region == Region::SRAM) {
        for (int i = 0; i < width; ++i)
            sram_[where.offset + i] = uint8_t(value >> (8 * i));
        return;
    }
    // Registers take whole-word writes; narrower writes land in the low lane.
    mmio_write(address & ~3u, value, m);
}

uint32_t Device::mmio_read(uint32_t a) {
    auto pend = [&](int n) { return core_.pending.count(n) != 0; };
    switch (a) {
    case reg::ICSR:
        return (pend(kNmi) ? reg::ICSR_NMIPENDSET : 0) | (pend(14) ? reg::ICSR_PENDSVSET : 0) |
               (pend(15) ? reg::ICSR_PENDSTSET : 0);
    case reg::VTOR: return core_.vtor;
    case reg::SHCSR:
        return (pend(kMemManage) ? 1u << 13 : 0) | (pend(kBusFault) ? 1u << 14 : 0) |
               (pend(kUsageFault) ? 1u << 12 : 0) | (pend(11) ? 1u << 15 : 0);
    case reg::DHCSR:
        return (core_.c_debugen ? reg::C_DEBUGEN : 0) | reg::S_REGRDY |
               (core_.run_state == RunState::HALTED ? reg::S_HALT | reg::C_HALT : 0) |
               (core_.run_state == RunState::LOCKUP ? reg::S_LOCKUP : 0);
    case reg::DEMCR: return pend(12) ? reg::DEMCR_MON_PEND : 0;
    case reg::FP_CTRL: return (fpb_.enabled ? 1u : 0) | (reg::kFpbComparators << 4);
    case reg::UART_SR: return 0xC0;
    case reg::DMA_SRC: return dma_.src;
    case reg::DMA_DST: return dma_.dst;
    case reg::DMA_COUNT: return dma_.count;
    case reg::DMA_CTRL: return dma_.state == DmaState::RUNNING ? 1 : 0;
    case reg::DMA_STATUS: return uint32_t(dma_.state) | (dma_.config_error ? 1u << 8 : 0);
    case reg::DMA_DONE: return dma_.done;
    default: break;
    }
    if (a >= reg::NVIC_ISPR0 && a < reg::NVIC_ISPR0 + 32) {
        uint32_t base = 16 + 32 * ((a - reg::NVIC_ISPR0) / 4);
        uint32_t v = 0;
        for (int i = 0; i < 32; ++i)
            if (pend(int(base) + i))
                v |= 1u << i;
        return v;
    }
    for (int i = 0; i < reg::kFpbComparators; ++i) {
        const auto& c = fpb_.comparators[i];
        if (a == reg::FP_COMP0 + 4u * i)
            return c.match_address | (c.enabled ? 1u : 0);
        if (a == reg::FP_REPL0 + 4u * i)
            return c.replacement_value;
    }
    return 0;
}

void Device::mmio_write(uint32_t a, uint32_t v, Master m) {
    switch (a) {
    case reg::ICSR:
        if (v & reg::ICSR_NMIPENDSET)
            pend_exception(kNmi);
        if (v & reg::ICSR_PENDSVSET)
            pend_exception(14);
        if (v & reg::ICSR_PENDSTSET)
            pend_exception(15);
        return;
    case reg::VTOR: write_vtor(v); return;
    case reg::SHCSR:
        if (v & (1u << 13))
            pend_exception(kMemManage);
        if (v & (1u << 14))
            pend_exception(kBusFault);
        if (v & (1u << 12))
            pend_exception(kUsageFault);
        if (v & (1u << 15))
            pend_exception(11);
        return;
    case reg::DHCSR:
        if (m != Master::DEBUGGER || (v & 0xFFFF0000u) != reg::DHCSR_KEY)
            return;
        set_c_debugen(v & reg::C_DEBUGEN);
        if (core_.c_debugen) {
            if (v & reg::C_HALT)
                halt();
            else if (core_.run_state == RunState::HALTED)
                resume();
        }
        return;
    case reg::DEMCR:
        if (v & reg::DEMCR_MON_PEND)
            pend_exception(12);
        return;
    case reg::STIR: pend_exception(16 + int(v & 0x1FF)); return;
    case reg::FP_CTRL:
        if (v & 2)
            fpb_.enabled = v & 1;
        return;
    case reg::UART_DR: uart_.push_back(uint8_t(v)); return;
    case reg::DMA_SRC: dma_.src = v; return;
    case reg::DMA_DST: dma_.dst = v; return;
    case reg::DMA_COUNT: dma_.count = v; return;
    case reg::DMA_CTRL:
        if (!(v & 1)) {
            if (dma_.state != DmaState::RUNNING) {
                DmaChannel fresh;
                fresh.src = dma_.src;
                fresh.dst = dma_.dst;
                fresh.count = dma_.count;
                dma_ = fresh;
            }
            return;
        }
        try {
            dma_configure(dma_.src, dma_.dst, dma_.count);
            dma_start();
        } catch (const ConfigError&) {
            dma_.state = DmaState::FAULTED;
            dma_.config_error = true;
        } catch (const ProtocolError&) {
            // start while busy is ignored, as on the real controller
        }
        return;
    default: break;
    }
    if (a >= reg::NVIC_ISPR0 && a < reg::NVIC_ISPR0 + 32) {
        int base = 16 + 32 * int((a - reg::NVIC_ISPR0) / 4);
        for (int i = 0; i < 32; ++i)
            if (v & (1u << i))
                pend_exception(base + i);
        return;
    }
    for (int i = 0; i < reg::kFpbComparators; ++i) {
        auto& c = fpb_.comparators[i];
        if (a == reg::FP_COMP0 + 4u * i) {
            c.match_address = v & 0x1FFFFFFCu;
            c.enabled = v & 1;
            return;
        }
        if (a == reg::FP_REPL0 + 4u * i) {
            c.replacement_value = v;
            return;
        }
    }
}

// ---- option bytes / programming -------------------------------------------

RdpLevel Device::load_option_bytes() {
    uint16_t raw = profile_.dual_die ? qspi_boot() : option_raw_;
    rdp_ = decode_rdp(raw, profile_);
    return rdp_;
}

void Device::write_option_bytes(uint16_t raw) {
    if (!powered_)
        throw ProtocolError("device unpowered");
    if (rdp_.level == Rdp::L2)
        throw ProtocolError("option bytes are frozen in RDP level 2");
    if (rdp_.level == Rdp::L1 && decode_rdp(raw, profile_).level == Rdp::L0)
        mass_erase();
    option_raw_ = raw;
}

void Device::program_flash(const std::vector<uint8_t>& image) {
    if (!powered_)
        throw ProtocolError("device unpowered");
    if (rdp_.level != Rdp::L0)
        throw ProtocolError("flash programming requires RDP level 0");
    if (image.size() > flash_.size())
        throw ConfigError("image larger than flash");
    std::copy(image.begin(), image.end(), flash_.begin());
}

}  // namespace rdpsim

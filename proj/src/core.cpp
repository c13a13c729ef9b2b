#include <stdexcept>

#include "rdpsim/coverage.hpp"
#include "rdpsim/device.hpp"
#include "rdpsim/micro_isa.hpp"

namespace rdpsim {

namespace {

ExecFrom region_to_exec(Region r) {
    switch (r) {
    case Region::FLASH: return ExecFrom::FLASH;
    case Region::BOOTLOADER: return ExecFrom::BOOTLOADER;
    case Region::SRAM: return ExecFrom::SRAM;
    default: return ExecFrom::NONE;
    }
}

bool is_fault(int n) {
    return n >= kHardFault && n <= kUsageFault;
}

}  // namespace

ExecFrom Device::executing_from() const {
    if (!powered_)
        return ExecFrom::NONE;
    if (exec_override_ != ExecFrom::NONE)
        return exec_override_;
    if (core_.run_state != RunState::RUNNING && !stepping_)
        return ExecFrom::NONE;
    return region_to_exec(resolve_address(profile_, boot_mode_, core_.regs[15]).region);
}

uint32_t Device::read_reg(Reg r) const {
    if (r == Reg::XPSR)
        return core_.t_flag ? 1u << 24 : 0;
    return core_.regs[static_cast<int>(r)];
}

void Device::write_reg(Reg r, uint32_t v) {
    if (r == Reg::XPSR) {
        core_.t_flag = v & (1u << 24);
        return;
    }
    core_.regs[static_cast<int>(r)] = v;
}

bool Device::pendable(int n) const {
    const auto& c = profile_.d1b_params;
    if (c.usable_system_exceptions.count(n))
        return true;
    return n >= 16 && n < 16 + int(c.max_pendable_irq);
}

bool Device::pend_exception(int n) {
    if (!powered_ || !pendable(n))
        return false;
    core_.pending.insert(n);
    return true;
}

void Device::write_vtor(uint32_t value) {
    if (!profile_.has_vtor)
        return;
    core_.vtor = value & ~(profile_.d1b_params.vtor_granularity - 1);
}

void Device::halt() {
    if (!core_.c_debugen)
        throw ProtocolError("halt requires C_DEBUGEN");
    if (core_.run_state == RunState::RUNNING)
        core_.run_state = RunState::HALTED;
}

void Device::resume() {
    if (!core_.c_debugen)
        throw ProtocolError("resume requires C_DEBUGEN");
    if (core_.run_state == RunState::HALTED)
        core_.run_state = RunState::RUNNING;
}

void Device::set_c_debugen(bool on) {
    core_.c_debugen = on;
    if (on)
        c_debugen_ever_set_ = true;
}

void Device::attach_debugger() {
    debugger_attached_ = true;
    if (profile_.lockdown_on_attach)
        flash_lockdown_ = true;
}

void Device::detach_debugger() {
    debugger_attached_ = false;
    core_.c_debugen = false;
    if (core_.run_state == RunState::HALTED)
        core_.run_state = RunState::RUNNING;
}

std::optional<uint32_t> Device::fetch(Access kind, uint32_t address, bool apply_fpb,
                                      ExecFrom from) {
    if (apply_fpb && fpb_.enabled && address < kSramBase) {
        for (const auto& c : fpb_.comparators)
            if (c.enabled && c.match_address == (address & ~3u))
                return c.replacement_value;
    }
    exec_override_ = from;
    BusResponse r;
    try {
        r = bus_access({Master::CPU_INSTR, kind, address, 4, 0});
    } catch (...) {
        exec_override_ = ExecFrom::NONE;
        throw;
    }
    exec_override_ = ExecFrom::NONE;
    if (!r.ok())
        return std::nullopt;
    return r.data;
}

std::optional<uint32_t> Device::table_index(int n) const {
    return effective_table_index(profile_, n);
}

uint32_t Device::vector_address(uint32_t index) const {
    return vector_fetch_address(profile_.d1b_params, profile_.has_vtor ? core_.vtor : 0, index);
}

EntryReport Device::take_exception(int n) {
    EntryReport rep;
    core_.pending.erase(n);
    auto idx = table_index(n);
    if (!idx) {
        core_.run_state = RunState::LOCKUP;
        return rep;
    }
    rep.vector_address = vector_address(*idx);
    auto v = fetch(Access::VECTOR_FETCH, rep.vector_address, true, ExecFrom::NONE);
    if (!v) {
        core_.run_state = RunState::LOCKUP;
        return rep;
    }
    core_.regs[15] = *v & 0xFFFFFFFEu;
    core_.t_flag = *v & 1;
    if (is_fault(n))
        core_.in_fault = true;
    rep.ok = true;
    rep.pc = core_.regs[15];
    rep.t_flag = core_.t_flag;
    return rep;
}

int Device::next_pending() const {
    if (core_.pending.count(kNmi))
        return kNmi;
    return *core_.pending.begin();
}

void Device::raise_fault(int n, StepReport& rep) {
    if (core_.in_fault) {
        core_.run_state = RunState::LOCKUP;
        rep.lockup = true;
        return;
    }
    core_.pending.insert(n);
    rep.fault_raised = n;
}

StepReport Device::step() {
    StepReport rep;
    if (!powered_ || core_.run_state == RunState::LOCKUP || core_.run_state == RunState::OFF) {
        rep.lockup = core_.run_state == RunState::LOCKUP;
        return rep;
    }
    if (!core_.pending.empty()) {
        int n = next_pending();
        rep.exception = n;
        if (!take_exception(n).ok)
            rep.lockup = true;
        return rep;
    }

    uint32_t pc = core_.regs[15];
    stepping_ = true;
    ExecFrom from = executing_from();
    auto lo = fetch(Access::INSTR_FETCH, pc, true, from);
    auto hi = lo ? fetch(Access::INSTR_FETCH, pc + 4, true, from) : std::nullopt;
    if (!lo || !hi) {
        stepping_ = false;
        core_.run_state = RunState::LOCKUP;
        rep.lockup = true;
        return rep;
    }
    auto ins = decode_words(*lo, *hi);
    if (!ins) {
        stepping_ = false;
        raise_fault(kUsageFault, rep);
        return rep;
    }

    auto& r = core_.regs;
    uint32_t next = pc + kInstrSize;
    rep.executed = true;
    switch (ins->op) {
    case Op::LOAD_WORD: {
        auto resp = bus_access({Master::CPU_DATA, Access::DATA_READ, r[ins->b] & ~3u, 4, 0});
        if (resp.ok())
            r[ins->a] = *resp.data;
        else
            raise_fault(kBusFault, rep);
        break;
    }
    case Op::STORE_WORD: {
        auto resp =
            bus_access({Master::CPU_DATA, Access::DATA_WRITE, r[ins->b] & ~3u, 4, r[ins->a]});
        if (!resp.ok())
            raise_fault(kBusFault, rep);
        break;
    }
    case Op::MOVE_IMM: r[ins->a] = ins->imm; break;
    case Op::ADD_IMM: r[ins->a] += ins->imm; break;
    case Op::BRANCH: next = ins->imm; break;
    case Op::BRANCH_IF_EQ:
        if (r[ins->a] == r[ins->b])
            next = ins->imm;
        break;
    case Op::UART_OUT:
        for (int i = 0; i < 4; ++i)
            uart_.push_back(uint8_t(r[ins->a] >> (8 * i)));
        break;
    case Op::HALT:
        core_.run_state = RunState::HALTED;
        rep.halted = true;
        break;
    }
    stepping_ = false;
    // A faulting instruction does not retire.
    if (!rep.fault_raised && !rep.lockup)
        r[15] = next;
    return rep;
}

void Device::reset() {
    if (!powered_)
        throw ProtocolError("reset on an unpowered device");
    core_.regs.fill(0);
    core_.t_flag = false;
    core_.vtor = 0;
    core_.pending.clear();
    core_.in_fault = false;
    core_.run_state = RunState::RUNNING;
    boot_mode_ = boot_pins_;
    reset_line_.push_back({clock_us_, false});
    reset_line_.push_back({clock_us_, true});
    auto sp = fetch(Access::VECTOR_FETCH, 0x0, profile_.fpb_reset_remap, ExecFrom::NONE);
    auto pc = sp ? fetch(Access::VECTOR_FETCH, 0x4, profile_.fpb_reset_remap, ExecFrom::NONE)
                 : std::nullopt;
    if (!sp || !pc) {
        core_.run_state = RunState::LOCKUP;
        return;
    }
    core_.regs[13] = *sp;
    core_.regs[15] = *pc & 0xFFFFFFFEu;
    core_.t_flag = *pc & 1;
}

void Device::tick(uint64_t n) {
    for (uint64_t i = 0; i < n; ++i) {
        ++cycles_;
        if (core_.run_state == RunState::RUNNING)
            step();
        if (dma_.state == DmaState::RUNNING)
            dma_word();
    }
}

std::vector<uint8_t> Device::uart_drain() {
    std::vector<uint8_t> out;
    out.swap(uart_);
    return out;
}

}  // namespace rdpsim

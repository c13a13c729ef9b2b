#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rdpsim/profiles.hpp"
#include "rdpsim/qspi.hpp"

namespace rdpsim {

// ---- memory-mapped registers ---------------------------------------------

namespace reg {
constexpr uint32_t ICSR = 0xE000ED04;
constexpr uint32_t VTOR = 0xE000ED08;
constexpr uint32_t SHCSR = 0xE000ED24;
constexpr uint32_t DHCSR = 0xE000EDF0;
constexpr uint32_t DEMCR = 0xE000EDFC;
constexpr uint32_t NVIC_ISPR0 = 0xE000E200;
constexpr uint32_t STIR = 0xE000EF00;
constexpr uint32_t DEBUG_CONTROL_BASE = 0xE000EDF0;
constexpr uint32_t DEBUG_CONTROL_END = 0xE000EE00;
constexpr uint32_t SYSTEM_END = 0xE0100000;

constexpr uint32_t FP_CTRL = 0xE0002000;
constexpr uint32_t FP_COMP0 = 0xE0002008;  // match address | enable (bit 0)
constexpr uint32_t FP_REPL0 = 0xE0002080;  // replacement value
constexpr int kFpbComparators = 6;

constexpr uint32_t DHCSR_KEY = 0xA05F0000;
constexpr uint32_t C_DEBUGEN = 1u << 0;
constexpr uint32_t C_HALT = 1u << 1;
constexpr uint32_t C_STEP = 1u << 2;
constexpr uint32_t S_REGRDY = 1u << 16;
constexpr uint32_t S_HALT = 1u << 17;
constexpr uint32_t S_LOCKUP = 1u << 19;

constexpr uint32_t ICSR_NMIPENDSET = 1u << 31;
constexpr uint32_t ICSR_PENDSVSET = 1u << 28;
constexpr uint32_t ICSR_PENDSTSET = 1u << 26;
constexpr uint32_t DEMCR_MON_PEND = 1u << 17;

constexpr uint32_t UART_BASE = 0x40013800;
constexpr uint32_t UART_SR = UART_BASE + 0x00;
constexpr uint32_t UART_DR = UART_BASE + 0x04;

constexpr uint32_t DMA_BASE = 0x40020000;
constexpr uint32_t DMA_SRC = DMA_BASE + 0x00;
constexpr uint32_t DMA_DST = DMA_BASE + 0x04;
constexpr uint32_t DMA_COUNT = DMA_BASE + 0x08;
constexpr uint32_t DMA_CTRL = DMA_BASE + 0x0C;     // bit 0: start
constexpr uint32_t DMA_STATUS = DMA_BASE + 0x10;   // [1:0] state, bit 8 config error
constexpr uint32_t DMA_DONE = DMA_BASE + 0x14;     // words transferred
}  // namespace reg

constexpr int kNmi = 2;
constexpr int kHardFault = 3;
constexpr int kMemManage = 4;
constexpr int kBusFault = 5;
constexpr int kUsageFault = 6;

// ---- bus -------------------------------------------------------------------

struct BusRequest {
    Master master = Master::DEBUGGER;
    Access access = Access::DATA_READ;
    uint32_t address = 0;
    uint8_t width = 4;
    uint32_t value = 0;  // for writes
};

enum class BusStatus { OK, DENIED, UNMAPPED };

struct BusResponse {
    BusStatus status = BusStatus::UNMAPPED;
    std::optional<uint32_t> data;  // present only for successful reads
    Region region = Region::UNMAPPED;

    bool ok() const { return status == BusStatus::OK; }
};

struct AccessContext {
    RdpLevel rdp;
    bool debugger_attached = false;
    bool c_debugen_ever_set = false;
    bool flash_lockdown = false;
    BootMode boot_mode = BootMode::FLASH;
    ExecFrom executing_from = ExecFrom::NONE;
};

bool rule_matches(const PolicyRule& rule, Master m, Access a, Region r, const AccessContext& ctx);
// First matching rule; nullptr only for a non-total rule list.
const PolicyRule* match_rule(const std::vector<PolicyRule>& rules, Master m, Access a, Region r,
                             const AccessContext& ctx);
Verdict evaluate_policy(const std::vector<PolicyRule>& rules, Master m, Access a, Region r,
                        const AccessContext& ctx);

struct Resolved {
    Region region = Region::UNMAPPED;
    uint32_t offset = 0;  // within the region's backing store
};
Resolved resolve_address(const DeviceProfile& p, BootMode boot_mode, uint32_t address);

// ---- core ------------------------------------------------------------------

enum class Reg : uint8_t {
    R0 = 0, R1, R2, R3, R4, R5, R6, R7, R8, R9, R10, R11, R12,
    SP = 13, LR = 14, PC = 15, XPSR = 16
};

struct CoreState {
    std::array<uint32_t, 16> regs{};  // r0..r12, sp, lr, pc
    bool t_flag = false;
    uint32_t vtor = 0;
    RunState run_state = RunState::OFF;
    std::set<int> pending;
    bool c_debugen = false;
    bool in_fault = false;
};

struct FpbComparator {
    uint32_t match_address = 0;
    uint32_t replacement_value = 0;
    bool enabled = false;

    bool operator==(const FpbComparator&) const = default;
};

struct FpbConfig {
    bool enabled = false;
    std::array<FpbComparator, reg::kFpbComparators> comparators{};

    bool empty() const;
    bool operator==(const FpbConfig&) const = default;
};

struct StepReport {
    bool executed = false;              // an instruction ran
    std::optional<int> exception;       // an exception entry happened instead
    std::optional<int> fault_raised;    // fault pended by this instruction
    bool lockup = false;
    bool halted = false;
};

struct EntryReport {
    bool ok = false;
    uint32_t vector_address = 0;
    uint32_t pc = 0;
    bool t_flag = false;
};

// ---- dma -------------------------------------------------------------------

enum class DmaState { IDLE, RUNNING, DONE, FAULTED };

struct DmaChannel {
    uint32_t src = 0;
    uint32_t dst = 0;
    uint32_t count = 0;
    DmaState state = DmaState::IDLE;
    uint32_t done = 0;
    std::optional<uint32_t> fault_word;
    bool config_error = false;
};

struct DmaReport {
    DmaState state = DmaState::IDLE;
    uint32_t words_done = 0;
    std::optional<uint32_t> fault_word;
};

// ---- lifecycle -------------------------------------------------------------

struct PowerEvent {
    enum class Kind { POWER_ON, POWER_OFF, GLITCH, RESET_PULSE };
    Kind kind = Kind::POWER_ON;
    uint32_t duration_us = 0;

    static PowerEvent power_on() { return {Kind::POWER_ON, 0}; }
    static PowerEvent power_off() { return {Kind::POWER_OFF, 0}; }
    static PowerEvent glitch(uint32_t us) { return {Kind::GLITCH, us}; }
    static PowerEvent reset_pulse() { return {Kind::RESET_PULSE, 0}; }
};

struct ResetLineSample {
    uint64_t time_us = 0;
    bool high = true;

    bool operator==(const ResetLineSample&) const = default;
};

// ---- device ----------------------------------------------------------------

// One emulated microcontroller. The public members below double as the
// "introspection" surface used by tests; exploits only see AttackRig.
class Device {
public:
    Device(DeviceProfile profile, uint64_t seed = 1);

    const DeviceProfile& profile() const { return profile_; }
    uint64_t seed() const { return seed_; }

    // Factory provisioning: writes the nonvolatile state directly.
    void provision(const std::vector<uint8_t>& image, uint16_t option_raw);

    // memory-bus
    BusResponse bus_access(const BusRequest& req);
    AccessContext context(ExecFrom executing_from) const;
    RdpLevel load_option_bytes();
    void write_option_bytes(uint16_t raw);  // throws ProtocolError in L2
    void program_flash(const std::vector<uint8_t>& image);  // throws in L1/L2

    // core
    StepReport step();
    EntryReport take_exception(int n);
    void reset();
    bool pendable(int n) const;
    bool pend_exception(int n);
    void write_vtor(uint32_t value);
    void halt();
    void resume();
    ExecFrom executing_from() const;

    // dma
    void dma_configure(uint32_t src, uint32_t dst, uint32_t count);
    DmaReport dma_start();
    DmaReport dma_report() const;

    // lifecycle
    void apply_power_event(const PowerEvent& ev);
    void set_boot_pins(BootMode mode) { boot_pins_ = mode; }
    BootMode boot_pins() const { return boot_pins_; }
    uint64_t now_us() const { return clock_us_; }
    const std::vector<ResetLineSample>& reset_line() const { return reset_line_; }

    // qspi
    QspiBus& qspi_bus() { return qspi_; }
    void start_capture();
    QspiTrace stop_capture();
    bool capturing() const { return capturing_; }
    bool page_fetched(uint32_t page) const;

    // debug attachment, used by DebugSession
    void attach_debugger();
    void detach_debugger();
    void set_c_debugen(bool on);
    uint64_t power_epoch() const { return power_epoch_; }

    // time
    void tick(uint64_t cycles = 1);
    uint64_t cycles() const { return cycles_; }

    std::vector<uint8_t> uart_drain();
    const std::vector<uint8_t>& uart() const { return uart_; }

    // introspection
    bool powered() const { return powered_; }
    RdpLevel rdp() const { return rdp_; }
    uint16_t stored_option_raw() const { return option_raw_; }
    const std::vector<uint8_t>& flash() const { return flash_; }
    const std::vector<uint8_t>& sram() const { return sram_; }
    std::vector<uint8_t>& sram_mut() { return sram_; }
    const std::vector<uint8_t>& bootloader() const { return bootloader_; }
    const CoreState& core() const { return core_; }
    CoreState& core_mut() { return core_; }
    const FpbConfig& fpb() const { return fpb_; }
    void set_fpb(const FpbConfig& f) { fpb_ = f; }
    bool debugger_attached() const { return debugger_attached_; }
    bool c_debugen_ever_set() const { return c_debugen_ever_set_; }
    bool flash_lockdown() const { return flash_lockdown_; }
    BootMode boot_mode() const { return boot_mode_; }
    const DmaChannel& dma() const { return dma_; }
    uint32_t bootloader_gadget_offset() const { return gadget_offset_; }

    // Reg access without gating (debug port applies the checks).
    uint32_t read_reg(Reg r) const;
    void write_reg(Reg r, uint32_t v);

private:
    friend class FlashDie;

    // memory
    std::optional<uint32_t> load(Resolved where, uint32_t address, uint8_t width);
    void store(Resolved where, uint32_t address, uint8_t width, uint32_t value, Master m);
    uint32_t mmio_read(uint32_t address);
    void mmio_write(uint32_t address, uint32_t value, Master m);
    void mass_erase();
    void ensure_page_fetched(uint32_t offset);

    // core internals
    std::optional<uint32_t> fetch(Access kind, uint32_t address, bool apply_fpb, ExecFrom from);
    void raise_fault(int n, StepReport& rep);
    int next_pending() const;
    std::optional<uint32_t> table_index(int n) const;
    uint32_t vector_address(uint32_t index) const;

    // dma internals
    void dma_word();
    void dma_run_to_end();

    // boot
    void power_on_boot();
    void clear_volatile(bool keep_sram);
    uint16_t qspi_boot();
    void qspi_fetch_page(uint32_t page);
    void build_bootloader();

    DeviceProfile profile_;
    uint64_t seed_;

    // nonvolatile
    std::vector<uint8_t> flash_;
    uint16_t option_raw_ = kRdpRawL0;
    std::vector<uint8_t> bootloader_;
    uint32_t gadget_offset_ = 0;

    // volatile
    bool powered_ = false;
    uint64_t power_epoch_ = 0;
    RdpLevel rdp_;
    BootMode boot_pins_ = BootMode::FLASH;
    BootMode boot_mode_ = BootMode::FLASH;
    bool debugger_attached_ = false;
    bool c_debugen_ever_set_ = false;
    bool flash_lockdown_ = false;
    std::vector<uint8_t> sram_;
    CoreState core_;
    FpbConfig fpb_;
    DmaChannel dma_;
    std::vector<uint8_t> uart_;
    std::vector<bool> fetched_;
    ExecFrom exec_override_ = ExecFrom::NONE;
    bool stepping_ = false;

    QspiBus qspi_;
    bool capturing_ = false;
    std::vector<QspiTransaction> captured_;

    uint64_t clock_us_ = 0;
    uint64_t cycles_ = 0;
    std::vector<ResetLineSample> reset_line_;
};

// Words in SRAM <-> bytes helpers.
inline uint32_t read_le32(const std::vector<uint8_t>& m, size_t off) {
    return uint32_t(m[off]) | uint32_t(m[off + 1]) << 8 | uint32_t(m[off + 2]) << 16 |
           uint32_t(m[off + 3]) << 24;
}
inline void write_le32(std::vector<uint8_t>& m, size_t off, uint32_t v) {
    m[off] = uint8_t(v);
    m[off + 1] = uint8_t(v >> 8);
    m[off + 2] = uint8_t(v >> 16);
    m[off + 3] = uint8_t(v >> 24);
}

}  // namespace rdpsim

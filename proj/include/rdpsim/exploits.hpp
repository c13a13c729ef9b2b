#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdpsim/debug_port.hpp"
#include "rdpsim/deobf.hpp"
#include "rdpsim/device.hpp"

namespace rdpsim {

// The attacker's bench: a debug probe, a bench supply with glitch
// capability, BOOT jumpers, a UART adapter and (for dual-die parts) a logic
// analyzer and an injector clipped onto one bonding wire. It deliberately
// exposes no view of the target's memories or flags.
class AttackRig {
public:
    explicit AttackRig(Device& target);

    // Datasheet knowledge: memory sizes, core revision, interrupt count.
    const DeviceProfile& profile() const { return dev_.profile(); }
    Transcript& transcript() { return transcript_; }
    const Transcript& transcript() const { return transcript_; }

    DebugSession attach();  // throws ConnectRefused / ProtocolError
    void note(const std::string& what, nlohmann::json detail = {});

    void power_off();
    void power_on();
    void power_cycle();
    void glitch(uint32_t duration_us);
    void reset_pulse();
    void set_boot_pins(BootMode mode);

    void run(uint64_t cycles);
    std::vector<uint8_t> uart_read();

    // DMA driven through its registers from the debugger.
    DmaReport dma_copy(DebugSession& s, uint32_t src, uint32_t dst, uint32_t words);

    void start_capture();
    QspiTrace stop_capture();
    void arm_injector(const FaultInjector& inj);
    void disarm_injector();

    // A blank unit of the same part, owned and programmable by the attacker.
    std::unique_ptr<Device> make_twin() const;

    uint64_t op_count() const { return transcript_.size(); }

private:
    void physical(const std::string& op, nlohmann::json args = nlohmann::json::object());

    Device& dev_;
    Transcript transcript_;
};

struct AttackOptions {
    uint32_t glitch_us = 300;
    bool skip_glitch = false;        // H3 with the supply glitch left out
    uint32_t attempts = 3;           // H2 retries
    std::optional<FaultInjector> injector;  // H2 override; default: IO2 injector
    bool infer_matrices = false;     // H1 reverse-engineering mode
    bool touch_all_pages = true;     // H1: force on-demand page fetches
    uint32_t dma_chunk_words = 1024;
    uint64_t run_budget_cycles = 4'000'000;
};

struct ExtractionReport {
    DeviceName device = DeviceName::STM32F103;
    AttackId attack = AttackId::D0;
    AttackStatus status = AttackStatus::FAILED;
    std::vector<uint8_t> recovered;  // flash_size bytes
    std::vector<bool> valid;         // one per flash word
    double coverage_percent = 0.0;
    uint64_t op_count = 0;
    Transcript transcript;
    std::string detail;
    nlohmann::json extra = nlohmann::json::object();

    uint32_t valid_words() const;
    void set_word(uint32_t offset, uint32_t value);
    void finish();  // recompute coverage
};

// Programs the inference probe pages into an attacker-owned L0 unit and
// captures its boot trace.
QspiTrace capture_probe_trace(Device& twin);

// Upper bound on rig operations for a successful run, N = flash words.
// Word-at-a-time debugger loops (D1A, D1B): 4N+1024. Block reads (D2, H2):
// N+1024. Firmware-side dumps (D1C, H1, H3): 1024. D0 and H0: N+1024.
uint64_t op_budget(AttackId id, const DeviceProfile& p);

ExtractionReport run_attack(AttackId id, AttackRig& rig, const AttackOptions& opt = {});

ExtractionReport exploit_d0(AttackRig& rig, const AttackOptions& opt = {});
ExtractionReport exploit_d1a(AttackRig& rig, const AttackOptions& opt = {});
ExtractionReport exploit_d1b(AttackRig& rig, const AttackOptions& opt = {});
ExtractionReport exploit_d1c(AttackRig& rig, const AttackOptions& opt = {});
ExtractionReport exploit_d2(AttackRig& rig, const AttackOptions& opt = {});
ExtractionReport exploit_h0(AttackRig& rig, const AttackOptions& opt = {});
ExtractionReport exploit_h1(AttackRig& rig, const AttackOptions& opt = {});
ExtractionReport exploit_h2(AttackRig& rig, const AttackOptions& opt = {});
ExtractionReport exploit_h3(AttackRig& rig, const AttackOptions& opt = {});

// JSON report without the recovered bytes (those go to a raw sidecar).
nlohmann::json report_to_json(const ExtractionReport& r);
// Recovered image plus validity bitmap as files: <stem>.bin, <stem>.json.
void save_report(const ExtractionReport& r, const std::string& dir, const std::string& stem);

// Bytes an observer sees in the transcript results (values little-endian,
// hex blobs decoded), used for leak checks.
std::vector<uint8_t> transcript_result_bytes(const Transcript& t);

// Seeded high-entropy victim image with a valid vector pair and an idle loop.
std::vector<uint8_t> random_victim_image(const DeviceProfile& p, uint64_t seed);
// Code-like image: realistic vector table, then repeated instruction patterns.
std::vector<uint8_t> structured_victim_image(const DeviceProfile& p, uint64_t seed);

}  // namespace rdpsim

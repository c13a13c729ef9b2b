#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rdpsim/profiles.hpp"

namespace rdpsim {

// One quad-I/O read as seen by a logic analyzer. Each nibble is the 4-bit
// sample of IO3..IO0 for one clock cycle (bit k = IOk).
struct QspiTransaction {
    uint8_t command = 0;
    uint32_t address = 0;
    uint32_t dummy_cycles = 0;
    std::vector<uint8_t> data;
    std::vector<uint8_t> nibbles;

    bool operator==(const QspiTransaction&) const = default;
};

struct QspiTrace {
    std::string device;
    double clock_mhz = 4.0;
    std::vector<QspiTransaction> transactions;

    bool operator==(const QspiTrace&) const = default;
};

constexpr int kAddressNibbles = 6;
constexpr int kCommandNibbles = 2;

std::vector<uint8_t> expand_address(uint32_t address);  // 6 nibbles, MS first
std::vector<uint8_t> encode_nibbles(uint8_t command, uint32_t address, uint32_t dummy,
                                    const std::vector<uint8_t>& data);
// Inverse of encode_nibbles; throws std::invalid_argument on length mismatch.
QspiTransaction decode_nibbles(const std::vector<uint8_t>& nibbles, uint32_t dummy);

// Stream-position helpers for a transaction's nibble vector.
inline size_t address_phase_start() { return kCommandNibbles; }
inline size_t data_phase_start(uint32_t dummy) { return kCommandNibbles + kAddressNibbles + dummy; }

// Trigger: after at least `min_zero_run` zeros, `ones_blocks` runs of ones
// separated by at most `max_gap` zeros; fires on the next falling edge of the
// monitored line, `delay_cycles` later.
struct FaultTrigger {
    uint32_t min_zero_run = 40;
    uint32_t ones_blocks = 3;
    uint32_t max_gap = 4;
    uint32_t delay_cycles = 0;

    bool operator==(const FaultTrigger&) const = default;
};

struct FaultInjector {
    QspiLine line = QspiLine::IO2;
    std::optional<QspiLine> monitor;  // defaults to `line`
    FaultTrigger trigger;
    std::vector<uint8_t> override_bits;  // forced onto `line`, one per cycle

    QspiLine monitored() const { return monitor.value_or(line); }
    bool operator==(const FaultInjector&) const = default;
};

// The H2 injector: during the option-byte address phase, IO2 driven so that
// 0x004000 reads back as 0x000400.
FaultInjector h2_address_injector();

// Cycle-level model of the shared bus with an optional injector clipped on.
class QspiBus {
public:
    void arm(const FaultInjector& inj);
    void disarm();
    bool armed() const { return injector_.has_value(); }
    const std::optional<FaultInjector>& injector() const { return injector_; }
    void begin_boot();  // re-arms the trigger for a fresh boot
    bool fired() const { return fired_; }

    // Passes one cycle through the injector and returns the value on the wire.
    uint8_t drive(uint8_t nibble);

private:
    void observe(bool level);

    std::optional<FaultInjector> injector_;
    // run-length history of the monitored line: (level, length)
    std::vector<std::pair<bool, uint32_t>> runs_;
    bool fired_ = false;
    bool pending_ = false;
    uint32_t countdown_ = 0;
    size_t override_pos_ = 0;
    bool overriding_ = false;
};

// Flash-die byte source: address -> byte, without any bus effects.
class FlashDieImage {
public:
    virtual ~FlashDieImage() = default;
    virtual uint8_t read_byte(uint32_t address) const = 0;
};

// Runs one read: logic die sends command/address, flash die answers from
// the (possibly altered) address.
QspiTransaction qspi_transfer(QspiBus& bus, const FlashDieImage& die, uint8_t command,
                              uint32_t address, uint32_t dummy, uint32_t length);

std::vector<uint8_t> factory_config_blob(uint32_t size);

std::vector<uint8_t> obfuscate_page(uint32_t page_index, const std::vector<uint8_t>& logical,
                                    const DeviceProfile& profile);
std::vector<uint8_t> deobfuscate_page(uint32_t page_index, const std::vector<uint8_t>& physical,
                                      const DeviceProfile& profile);

void write_trace(std::ostream& out, const QspiTrace& trace);
QspiTrace read_trace(std::istream& in);
void save_trace(const std::string& path, const QspiTrace& trace);
QspiTrace load_trace(const std::string& path);

// Bits of one line across a transaction (or a whole trace).
std::vector<uint8_t> line_bits(const std::vector<uint8_t>& nibbles, QspiLine line);

}  // namespace rdpsim

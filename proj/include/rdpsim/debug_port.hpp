#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdpsim/device.hpp"

namespace rdpsim {

class ConnectRefused : public ProtocolError {
public:
    using ProtocolError::ProtocolError;
};

struct TranscriptRecord {
    std::string op;
    nlohmann::json args;
    nlohmann::json result;
};

// Append-only log of debugger calls: a JSON array of {op, args, result}.
class Transcript {
public:
    void add(std::string op, nlohmann::json args, nlohmann::json result);
    const std::vector<TranscriptRecord>& records() const { return records_; }
    size_t size() const { return records_.size(); }
    bool contains_op(const std::string& op) const;
    nlohmann::json to_json() const;
    void save(const std::string& path) const;

private:
    std::vector<TranscriptRecord> records_;
};

// The debugger master. All calls go through the bus or the debug registers;
// the session dies with the debugger link or the power rail.
class DebugSession {
public:
    // Throws ConnectRefused in RDP level 2 and ProtocolError when unpowered or
    // already attached.
    static DebugSession attach(Device& device, Transcript* log = nullptr);

    uint32_t idcode() const { return idcode_; }
    bool attached() const;

    BusResponse mem_read(uint32_t address, uint8_t width = 4);
    BusResponse mem_write(uint32_t address, uint32_t value, uint8_t width = 4);

    void set_c_debugen(bool on);
    void halt();
    void resume();
    uint32_t reg_read(Reg r);
    void reg_write(Reg r, uint32_t value);
    StepReport single_step();
    bool pend_exception(int n);

    void program_flash(const std::vector<uint8_t>& image);
    void write_option_bytes(uint16_t raw);
    void detach();

    uint64_t op_count() const { return ops_; }

private:
    DebugSession(Device& d, Transcript* log);
    void check() const;
    void require_debugen() const;
    void log(const std::string& op, nlohmann::json args, nlohmann::json result);

    Device* dev_;
    Transcript* log_;
    uint32_t idcode_ = 0;
    uint64_t epoch_ = 0;
    bool attached_ = false;
    uint64_t ops_ = 0;
};

}  // namespace rdpsim

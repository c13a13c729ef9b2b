#include "rdpsim/debug_port.hpp"

#include <fstream>

namespace rdpsim {

namespace {

nlohmann::json response_json(const BusResponse& r) {
    nlohmann::json j;
    switch (r.status) {
    case BusStatus::OK: j["status"] = "OK"; break;
    case BusStatus::DENIED: j["status"] = "DENIED"; break;
    case BusStatus::UNMAPPED: j["status"] = "UNMAPPED"; break;
    }
    if (r.data)
        j["value"] = *r.data;
    return j;
}

const char* reg_name(Reg r) {
    static const char* names[] = {"r0", "r1", "r2",  "r3",  "r4", "r5", "r6", "r7",  "r8",
                                  "r9", "r10", "r11", "r12", "sp", "lr", "pc", "xpsr"};
    return names[static_cast<int>(r)];
}

}  // namespace

void Transcript::add(std::string op, nlohmann::json args, nlohmann::json result) {
    records_.push_back({std::move(op), std::move(args), std::move(result)});
}

bool Transcript::contains_op(const std::string& op) const {
    for (const auto& r : records_)
        if (r.op == op)
            return true;
    return false;
}

nlohmann::json Transcript::to_json() const {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& r : records_)
        a.push_back({{"op", r.op}, {"args", r.args}, {"result", r.result}});
    return a;
}

void Transcript::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write " + path);
    out << to_json().dump() << '\n';
}

DebugSession::DebugSession(Device& d, Transcript* log) : dev_(&d), log_(log) {}

DebugSession DebugSession::attach(Device& device, Transcript* log) {
    DebugSession s(device, log);
    if (!device.powered()) {
        s.log("attach", {}, {{"error", "unpowered"}});
        throw ProtocolError("attach: device unpowered");
    }
    if (device.rdp().level == Rdp::L2) {
        s.log("attach", {}, {{"error", "refused"}});
        throw ConnectRefused("attach refused: RDP level 2 disables the debug port");
    }
    if (device.debugger_attached())
        throw ProtocolError("attach: a debugger is already attached");
    device.attach_debugger();
    s.attached_ = true;
    s.epoch_ = device.power_epoch();
    s.idcode_ = device.profile().idcode;
    s.log("attach", {}, {{"idcode", s.idcode_}});
    return s;
}

bool DebugSession::attached() const {
    return attached_ && dev_->powered() && dev_->power_epoch() == epoch_ &&
           dev_->debugger_attached();
}

void DebugSession::check() const {
    if (!attached())
        throw ProtocolError("debug session is not attached");
}

void DebugSession::require_debugen() const {
    check();
    if (!dev_->core().c_debugen)
        throw ProtocolError("core access requires C_DEBUGEN");
}

void DebugSession::log(const std::string& op, nlohmann::json args, nlohmann::json result) {
    ++ops_;
    if (log_)
        log_->add(op, std::move(args), std::move(result));
}

BusResponse DebugSession::mem_read(uint32_t address, uint8_t width) {
    check();
    auto r = dev_->bus_access({Master::DEBUGGER, Access::DATA_READ, address, width, 0});
    log("mem_read", {{"addr", address}, {"width", width}}, response_json(r));
    return r;
}

BusResponse DebugSession::mem_write(uint32_t address, uint32_t value, uint8_t width) {
    check();
    auto r = dev_->bus_access({Master::DEBUGGER, Access::DATA_WRITE, address, width, value});
    log("mem_write", {{"addr", address}, {"width", width}, {"value", value}}, response_json(r));
    return r;
}

void DebugSession::set_c_debugen(bool on) {
    check();
    uint32_t v = reg::DHCSR_KEY | (on ? reg::C_DEBUGEN : 0);
    if (on && dev_->core().run_state == RunState::HALTED)
        v |= reg::C_HALT;
    auto r = dev_->bus_access({Master::DEBUGGER, Access::DATA_WRITE, reg::DHCSR, 4, v});
    log("set_c_debugen", {{"on", on}}, response_json(r));
}

void DebugSession::halt() {
    require_debugen();
    auto r = dev_->bus_access({Master::DEBUGGER, Access::DATA_WRITE, reg::DHCSR, 4,
                               reg::DHCSR_KEY | reg::C_DEBUGEN | reg::C_HALT});
    log("halt", {}, response_json(r));
}

void DebugSession::resume() {
    require_debugen();
    auto r = dev_->bus_access(
        {Master::DEBUGGER, Access::DATA_WRITE, reg::DHCSR, 4, reg::DHCSR_KEY | reg::C_DEBUGEN});
    log("resume", {}, response_json(r));
}

uint32_t DebugSession::reg_read(Reg r) {
    require_debugen();
    uint32_t v = dev_->read_reg(r);
    log("reg_read", {{"reg", reg_name(r)}}, {{"value", v}});
    return v;
}

void DebugSession::reg_write(Reg r, uint32_t value) {
    require_debugen();
    dev_->write_reg(r, value);
    log("reg_write", {{"reg", reg_name(r)}, {"value", value}}, {{"status", "OK"}});
}

StepReport DebugSession::single_step() {
    require_debugen();
    if (dev_->core().run_state != RunState::HALTED)
        throw ProtocolError("single_step requires a halted core");
    auto rep = dev_->step();
    nlohmann::json res = {{"executed", rep.executed}, {"lockup", rep.lockup}};
    if (rep.exception)
        res["exception"] = *rep.exception;
    if (rep.fault_raised)
        res["fault"] = *rep.fault_raised;
    log("single_step", {}, res);
    return rep;
}

bool DebugSession::pend_exception(int n) {
    check();
    bool ok = dev_->pend_exception(n);
    log("pend_exception", {{"n", n}}, {{"status", ok ? "OK" : "REFUSED"}});
    return ok;
}

void DebugSession::program_flash(const std::vector<uint8_t>& image) {
    check();
    try {
        dev_->program_flash(image);
    } catch (const ProtocolError&) {
        log("program_flash", {{"bytes", image.size()}}, {{"status", "REFUSED"}});
        throw;
    }
    log("program_flash", {{"bytes", image.size()}}, {{"status", "OK"}});
}

void DebugSession::write_option_bytes(uint16_t raw) {
    check();
    try {
        dev_->write_option_bytes(raw);
    } catch (const ProtocolError&) {
        log("write_option_bytes", {{"raw", raw}}, {{"status", "REFUSED"}});
        throw;
    }
    log("write_option_bytes", {{"raw", raw}}, {{"status", "OK"}});
}

void DebugSession::detach() {
    check();
    dev_->detach_debugger();
    attached_ = false;
    log("detach", {}, {{"status", "OK"}});
}

}  // namespace rdpsim

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace rdpsim {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Misuse of the debug port or device API (wrong state, missing C_DEBUGEN).
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DeviceName { STM32F103, APM32F103, CKS32F103, GD32F103, GD32F130, GD32VF103 };

enum class Rdp : uint8_t { L0 = 0, L1 = 1, L2 = 2 };

struct RdpLevel {
    Rdp level = Rdp::L1;
    uint16_t raw = 0xFFFF;

    bool operator==(const RdpLevel&) const = default;
};

constexpr uint16_t kRdpRawL0 = 0xA55A;
constexpr uint16_t kRdpRawL2 = 0xCC33;

enum class BootMode { FLASH, SRAM };

enum class Master : uint8_t { DEBUGGER, CPU_DATA, CPU_INSTR, DMA };
enum class Access : uint8_t { DATA_READ, DATA_WRITE, VECTOR_FETCH, INSTR_FETCH };
enum class Region : uint8_t {
    FLASH,
    SRAM,
    BOOTLOADER,
    OPTION_BYTES,
    PERIPHERAL,
    SYSTEM,
    DEBUG_CONTROL,
    UNMAPPED
};
enum class ExecFrom : uint8_t { NONE, FLASH, BOOTLOADER, SRAM };
enum class Verdict { ALLOW, DENY, LOCKDOWN_TRIGGER };

enum class VulnFlag {
    D1A_FLASH_GADGET,
    D1A_SRAM_CODE,
    D1B,
    D1C,
    D2_ALWAYS,
    D2_UNTIL_CDEBUGEN,
    H1,
    H2,
    H3
};

enum class WrapMode { MOD_TABLE, MAP_TO_START, NONE };
// How the table index is combined with VTOR for the vector fetch.
enum class VectorAddressing { ADD, OR };

enum class RunState { RUNNING, HALTED, LOCKUP, OFF };

enum class AttackId { D0, D1A, D1B, D1C, D2, H0, H1, H2, H3 };

enum class AttackStatus {
    SUCCESS,
    PARTIAL,
    NOT_VULNERABLE,
    GLITCH_FAILED,
    PRECONDITION_LOST,
    FAILED
};

enum class QspiLine : uint8_t { IO0 = 0, IO1 = 1, IO2 = 2, IO3 = 3 };

NLOHMANN_JSON_SERIALIZE_ENUM(DeviceName, {{DeviceName::STM32F103, "STM32F103"},
                                          {DeviceName::APM32F103, "APM32F103"},
                                          {DeviceName::CKS32F103, "CKS32F103"},
                                          {DeviceName::GD32F103, "GD32F103"},
                                          {DeviceName::GD32F130, "GD32F130"},
                                          {DeviceName::GD32VF103, "GD32VF103"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Rdp, {{Rdp::L0, "L0"}, {Rdp::L1, "L1"}, {Rdp::L2, "L2"}})
NLOHMANN_JSON_SERIALIZE_ENUM(BootMode, {{BootMode::FLASH, "FLASH"}, {BootMode::SRAM, "SRAM"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Master, {{Master::DEBUGGER, "DEBUGGER"},
                                      {Master::CPU_DATA, "CPU_DATA"},
                                      {Master::CPU_INSTR, "CPU_INSTR"},
                                      {Master::DMA, "DMA"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Access, {{Access::DATA_READ, "DATA_READ"},
                                      {Access::DATA_WRITE, "DATA_WRITE"},
                                      {Access::VECTOR_FETCH, "VECTOR_FETCH"},
                                      {Access::INSTR_FETCH, "INSTR_FETCH"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Region, {{Region::FLASH, "FLASH"},
                                      {Region::SRAM, "SRAM"},
                                      {Region::BOOTLOADER, "BOOTLOADER"},
                                      {Region::OPTION_BYTES, "OPTION_BYTES"},
                                      {Region::PERIPHERAL, "PERIPHERAL"},
                                      {Region::SYSTEM, "SYSTEM"},
                                      {Region::DEBUG_CONTROL, "DEBUG_CONTROL"},
                                      {Region::UNMAPPED, "UNMAPPED"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ExecFrom, {{ExecFrom::NONE, "NONE"},
                                        {ExecFrom::FLASH, "FLASH"},
                                        {ExecFrom::BOOTLOADER, "BOOTLOADER"},
                                        {ExecFrom::SRAM, "SRAM"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Verdict, {{Verdict::ALLOW, "ALLOW"},
                                       {Verdict::DENY, "DENY"},
                                       {Verdict::LOCKDOWN_TRIGGER, "LOCKDOWN_TRIGGER"}})
NLOHMANN_JSON_SERIALIZE_ENUM(VulnFlag, {{VulnFlag::D1A_FLASH_GADGET, "D1A_FLASH_GADGET"},
                                        {VulnFlag::D1A_SRAM_CODE, "D1A_SRAM_CODE"},
                                        {VulnFlag::D1B, "D1B"},
                                        {VulnFlag::D1C, "D1C"},
                                        {VulnFlag::D2_ALWAYS, "D2_ALWAYS"},
                                        {VulnFlag::D2_UNTIL_CDEBUGEN, "D2_UNTIL_CDEBUGEN"},
                                        {VulnFlag::H1, "H1"},
                                        {VulnFlag::H2, "H2"},
                                        {VulnFlag::H3, "H3"}})
NLOHMANN_JSON_SERIALIZE_ENUM(WrapMode, {{WrapMode::MOD_TABLE, "MOD_TABLE"},
                                        {WrapMode::MAP_TO_START, "MAP_TO_START"},
                                        {WrapMode::NONE, "NONE"}})
NLOHMANN_JSON_SERIALIZE_ENUM(VectorAddressing, {{VectorAddressing::ADD, "ADD"},
                                                {VectorAddressing::OR, "OR"}})
NLOHMANN_JSON_SERIALIZE_ENUM(RunState, {{RunState::RUNNING, "RUNNING"},
                                        {RunState::HALTED, "HALTED"},
                                        {RunState::LOCKUP, "LOCKUP"},
                                        {RunState::OFF, "OFF"}})
NLOHMANN_JSON_SERIALIZE_ENUM(AttackId, {{AttackId::D0, "D0"},
                                        {AttackId::D1A, "D1A"},
                                        {AttackId::D1B, "D1B"},
                                        {AttackId::D1C, "D1C"},
                                        {AttackId::D2, "D2"},
                                        {AttackId::H0, "H0"},
                                        {AttackId::H1, "H1"},
                                        {AttackId::H2, "H2"},
                                        {AttackId::H3, "H3"}})
NLOHMANN_JSON_SERIALIZE_ENUM(AttackStatus, {{AttackStatus::SUCCESS, "SUCCESS"},
                                            {AttackStatus::PARTIAL, "PARTIAL"},
                                            {AttackStatus::NOT_VULNERABLE, "NOT_VULNERABLE"},
                                            {AttackStatus::GLITCH_FAILED, "GLITCH_FAILED"},
                                            {AttackStatus::PRECONDITION_LOST, "PRECONDITION_LOST"},
                                            {AttackStatus::FAILED, "FAILED"}})
NLOHMANN_JSON_SERIALIZE_ENUM(QspiLine, {{QspiLine::IO0, "IO0"},
                                        {QspiLine::IO1, "IO1"},
                                        {QspiLine::IO2, "IO2"},
                                        {QspiLine::IO3, "IO3"}})

// Enum <-> name through the JSON tables above. parse_enum throws ConfigError
// on unknown names instead of silently taking the first enumerator.
template <typename E>
std::string enum_name(E e) {
    return nlohmann::json(e).template get<std::string>();
}

template <typename E>
E parse_enum(const std::string& name, const char* what) {
    nlohmann::json j = name;
    E e = j.template get<E>();
    if (enum_name(e) != name)
        throw ConfigError(std::string("unknown ") + what + ": " + name);
    return e;
}

inline std::string hex32(uint32_t v) {
    static const char* digits = "0123456789ABCDEF";
    std::string s = "0x00000000";
    for (int i = 0; i < 8; ++i)
        s[9 - i] = digits[(v >> (4 * i)) & 0xF];
    return s;
}

}  // namespace rdpsim

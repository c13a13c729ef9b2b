#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdpsim/gf2.hpp"
#include "rdpsim/types.hpp"

namespace rdpsim {

// Fixed address map.
constexpr uint32_t kFlashBase = 0x08000000;
constexpr uint32_t kSramBase = 0x20000000;
constexpr uint32_t kBootloaderBase = 0x1FFFF000;
constexpr uint32_t kOptionBytesBase = 0x1FFFF800;
constexpr uint32_t kOptionBytesSize = 16;
constexpr uint32_t kPeripheralBase = 0x40000000;
constexpr uint32_t kPeripheralEnd = 0x60000000;
constexpr uint32_t kSystemBase = 0xE0000000;

struct CoverageParams {
    std::set<int> usable_system_exceptions;
    uint32_t vtor_granularity = 0x80;
    uint32_t max_pendable_irq = 240;
    WrapMode wrap_mode = WrapMode::NONE;
    VectorAddressing vector_addressing = VectorAddressing::OR;

    bool operator==(const CoverageParams&) const = default;
};

struct QspiLayout {
    uint32_t factory_config_addr = 0x000400;
    uint32_t factory_config_size = 16;
    uint32_t bootloader_addr = 0x000800;
    uint32_t option_bytes_addr = 0x004000;
    uint32_t option_bytes_size = 16;
    uint32_t firmware_base = 0x010000;
    uint32_t page_size = 1024;
    uint32_t initial_fetch = 0;  // bytes fetched at boot
    uint8_t command = 0xE7;
    uint32_t dummy_cycles = 4;
    double clock_mhz = 4.0;

    bool operator==(const QspiLayout&) const = default;
};

struct Obfuscation {
    ObfuscationKey key;
    bool verified = true;

    bool operator==(const Obfuscation&) const = default;
};

// Bit set over small enums; empty means "any".
template <typename E>
constexpr uint32_t bit_of(E e) {
    return 1u << static_cast<unsigned>(e);
}

struct PolicyRule {
    std::string name;
    uint32_t masters = 0;
    uint32_t accesses = 0;
    uint32_t regions = 0;
    uint32_t executing_from = 0;
    Rdp min_rdp = Rdp::L0;
    Rdp max_rdp = Rdp::L2;
    std::optional<bool> debugger_attached;
    std::optional<bool> c_debugen_ever_set;
    std::optional<bool> flash_lockdown;
    std::optional<BootMode> boot_mode;
    Verdict verdict = Verdict::ALLOW;

    bool operator==(const PolicyRule&) const = default;
};

struct CveEntry {
    std::string vulnerability;
    std::string cve;

    bool operator==(const CveEntry&) const = default;
};

struct DeviceProfile {
    DeviceName name = DeviceName::STM32F103;
    std::string part_number;
    std::string isa;  // "ARMv7-M" or "RV32IMAC"
    uint32_t flash_size = 0;
    uint32_t sram_size = 0;
    uint32_t bootloader_base = kBootloaderBase;
    uint32_t bootloader_size = 0x800;
    uint32_t idcode = 0;
    std::optional<uint32_t> cpuid;
    int core_revision = 0;  // 1 or 2 for Cortex-M3, 0 otherwise
    bool has_vtor = true;
    bool fpb_reset_remap = true;  // FPB applies to reset-vector fetches
    bool lockdown_on_attach = false;
    std::set<Rdp> supported_rdp_levels;
    bool dual_die = false;
    std::set<VulnFlag> vuln_flags;
    uint32_t external_interrupt_count = 0;
    CoverageParams d1b_params;
    std::optional<QspiLayout> qspi_layout;
    std::optional<Obfuscation> obfuscation;
    uint32_t sram_remanence_us = 1000;
    std::vector<PolicyRule> policy;
    std::vector<CveEntry> cves;  // Table-4 metadata, verbatim

    bool has(VulnFlag f) const { return vuln_flags.count(f) != 0; }
    bool supports(Rdp r) const { return supported_rdp_levels.count(r) != 0; }
    uint32_t vector_table_entries() const { return 16 + external_interrupt_count; }
    uint32_t flash_words() const { return flash_size / 4; }
    uint32_t page_count() const { return flash_size / 1024; }

    bool operator==(const DeviceProfile&) const = default;
};

const std::vector<DeviceName>& all_devices();
const DeviceProfile& profile_for(DeviceName name);
const DeviceProfile& profile_for(const std::string& name);  // throws ConfigError

RdpLevel decode_rdp(uint16_t raw, const DeviceProfile& profile);
uint16_t canonical_raw(Rdp level);

// Reduced-flash copy of a profile for fast exhaustive tests.
DeviceProfile mini_profile(const DeviceProfile& base, uint32_t flash_size);

void to_json(nlohmann::json& j, const DeviceProfile& p);
void from_json(const nlohmann::json& j, DeviceProfile& p);
DeviceProfile load_profile_file(const std::string& path);

}  // namespace rdpsim

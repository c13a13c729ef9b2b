#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rdpsim/device.hpp"

namespace rdpsim {

constexpr char kSnapshotMagic[8] = {'R', 'D', 'P', 'S', 'N', 'A', 'P', '\0'};
constexpr uint32_t kSnapshotVersion = 1;

// Powered-off device state: profile, nonvolatile memories, SRAM contents and
// boot pins. Volatile core state is not kept; loading yields an unpowered
// device.
struct Snapshot {
    DeviceProfile profile;
    uint64_t seed = 1;
    uint16_t option_raw = 0xFFFF;
    BootMode boot_pins = BootMode::FLASH;
    std::vector<uint8_t> flash;
    std::vector<uint8_t> sram;
    std::vector<uint8_t> bootloader;

    static Snapshot of(const Device& d);
    std::unique_ptr<Device> instantiate() const;

    std::vector<uint8_t> serialize() const;
    static Snapshot deserialize(const std::vector<uint8_t>& bytes);  // throws ConfigError

    void save(const std::string& path) const;
    static Snapshot load(const std::string& path);
};

}  // namespace rdpsim

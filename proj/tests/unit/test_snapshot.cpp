#include <gtest/gtest.h>

#include <filesystem>

#include "rdpsim/exploits.hpp"
#include "rdpsim/snapshot.hpp"

using namespace rdpsim;

TEST(Snapshot, RoundTripIsByteIdentical) {
    for (auto dn : all_devices()) {
        const auto& p = profile_for(dn);
        Device d(p, 9);
        d.provision(random_victim_image(p, 9), 0x1234);
        d.set_boot_pins(BootMode::SRAM);
        auto bytes = Snapshot::of(d).serialize();
        auto back = Snapshot::deserialize(bytes);
        EXPECT_EQ(back.serialize(), bytes) << enum_name(dn);
        EXPECT_EQ(back.profile, p);
        auto d2 = back.instantiate();
        EXPECT_EQ(d2->flash(), d.flash());
        EXPECT_EQ(d2->stored_option_raw(), 0x1234);
        EXPECT_EQ(d2->boot_pins(), BootMode::SRAM);
        EXPECT_FALSE(d2->powered());
    }
}

TEST(Snapshot, FileRoundTrip) {
    const auto& p = profile_for("GD32F130");
    Device d(p, 3);
    d.provision(random_victim_image(p, 3), kRdpRawL2);
    auto path = (std::filesystem::temp_directory_path() / "rdpsim_test.snap").string();
    Snapshot::of(d).save(path);
    auto s = Snapshot::load(path);
    EXPECT_EQ(s.option_raw, kRdpRawL2);
    EXPECT_EQ(s.flash, d.flash());
    std::filesystem::remove(path);
}

TEST(Snapshot, RejectsBadInput) {
    EXPECT_THROW(Snapshot::deserialize({1, 2, 3}), ConfigError);
    Device d(profile_for("STM32F103"), 1);
    auto bytes = Snapshot::of(d).serialize();
    auto bad_version = bytes;
    bad_version[8] = 99;
    EXPECT_THROW(Snapshot::deserialize(bad_version), ConfigError);
    auto truncated = bytes;
    truncated.resize(bytes.size() - 10);
    EXPECT_THROW(Snapshot::deserialize(truncated), ConfigError);
    auto magic = bytes;
    magic[0] = 'X';
    EXPECT_THROW(Snapshot::deserialize(magic), ConfigError);
}

TEST(Snapshot, AttackFromSnapshotMatchesLiveDevice) {
    const auto& p = profile_for("CKS32F103");
    Device live(p, 5);
    live.provision(random_victim_image(p, 5), 0x1234);
    auto restored = Snapshot::deserialize(Snapshot::of(live).serialize()).instantiate();
    live.apply_power_event(PowerEvent::power_on());
    restored->apply_power_event(PowerEvent::power_on());
    AttackRig a(live), b(*restored);
    auto ra = exploit_d2(a, {}), rb = exploit_d2(b, {});
    EXPECT_EQ(report_to_json(ra), report_to_json(rb));
    EXPECT_EQ(ra.recovered, rb.recovered);
}

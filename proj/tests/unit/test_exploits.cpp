#include <gtest/gtest.h>

#include <unordered_set>

#include "rdpsim/coverage.hpp"
#include "rdpsim/exploits.hpp"

using namespace rdpsim;

namespace {

constexpr AttackId kAttacks[] = {AttackId::D0, AttackId::D1A, AttackId::D1B, AttackId::D1C, AttackId::D2,
                                 AttackId::H0, AttackId::H1,  AttackId::H2,  AttackId::H3};

bool flagged(const DeviceProfile& p, AttackId a) {
    switch (a) {
    case AttackId::D1A: return p.has(VulnFlag::D1A_FLASH_GADGET) || p.has(VulnFlag::D1A_SRAM_CODE);
    case AttackId::D1B: return p.has(VulnFlag::D1B);
    case AttackId::D1C: return p.has(VulnFlag::D1C);
    case AttackId::D2: return p.has(VulnFlag::D2_ALWAYS) || p.has(VulnFlag::D2_UNTIL_CDEBUGEN);
    case AttackId::H1: return p.has(VulnFlag::H1);
    case AttackId::H2: return p.has(VulnFlag::H2);
    case AttackId::H3: return p.has(VulnFlag::H3);
    default: return false;
    }
}

struct Target {
    std::unique_ptr<Device> dev;
    std::vector<uint8_t> image;
};

Target make_target(const DeviceProfile& p, uint16_t raw, uint64_t seed = 1234) {
    Target t{std::make_unique<Device>(p, seed), random_victim_image(p, seed)};
    t.dev->provision(t.image, raw);
    t.dev->apply_power_event(PowerEvent::power_on());
    return t;
}

ExtractionReport attack(const DeviceProfile& p, AttackId id, uint16_t raw = 0x1234,
                        const AttackOptions& opt = {}, Target* keep = nullptr) {
    auto t = make_target(p, raw);
    AttackRig rig(*t.dev);
    auto r = run_attack(id, rig, opt);
    if (keep)
        *keep = std::move(t);
    return r;
}

size_t mismatches(const ExtractionReport& r, const std::vector<uint8_t>& img) {
    size_t bad = 0;
    for (size_t w = 0; w < r.valid.size(); ++w)
        if (r.valid[w] && read_le32(r.recovered, 4 * w) != read_le32(img, 4 * w))
            ++bad;
    return bad;
}

bool transcript_leaks(const Transcript& t, const std::vector<uint8_t>& img) {
    std::unordered_set<uint64_t> windows;
    for (size_t i = 0; i + 8 <= img.size(); ++i) {
        uint64_t w;
        std::memcpy(&w, img.data() + i, 8);
        windows.insert(w);
    }
    auto bytes = transcript_result_bytes(t);
    for (size_t i = 0; i + 8 <= bytes.size(); ++i) {
        uint64_t w;
        std::memcpy(&w, bytes.data() + i, 8);
        if (windows.count(w))
            return true;
    }
    return false;
}

}  // namespace

TEST(Exploits, NegativeMatrix) {
    for (auto dn : all_devices()) {
        const auto& p = profile_for(dn);
        for (auto id : kAttacks) {
            if (flagged(p, id))
                continue;
            Target t;
            auto r = attack(p, id, 0x1234, {}, &t);
            EXPECT_EQ(r.status, AttackStatus::NOT_VULNERABLE) << enum_name(dn) << " " << enum_name(id);
            EXPECT_EQ(r.valid_words(), 0u);
            EXPECT_FALSE(transcript_leaks(r.transcript, t.image)) << enum_name(dn) << " " << enum_name(id);
        }
    }
}

TEST(Exploits, PositiveMatrixIsBitExact) {
    for (auto dn : all_devices()) {
        const auto& p = profile_for(dn);
        for (auto id : kAttacks) {
            if (!flagged(p, id))
                continue;
            Target t;
            auto r = attack(p, id, 0x1234, {}, &t);
            EXPECT_EQ(r.status, AttackStatus::SUCCESS) << enum_name(dn) << " " << enum_name(id);
            EXPECT_GT(r.valid_words(), 0u);
            EXPECT_EQ(mismatches(r, t.image), 0u) << enum_name(dn) << " " << enum_name(id);
            EXPECT_LE(r.op_count, op_budget(id, p)) << enum_name(dn) << " " << enum_name(id);
        }
    }
}

TEST(Exploits, EveryDeviceFullyExtractable) {
    for (auto dn : all_devices()) {
        const auto& p = profile_for(dn);
        double best = 0;
        for (auto id : kAttacks)
            if (flagged(p, id))
                best = std::max(best, attack(p, id).coverage_percent);
        EXPECT_DOUBLE_EQ(best, 100.0) << enum_name(dn);
    }
}

TEST(Exploits, D1aPaths) {
    auto cks = attack(profile_for("CKS32F103"), AttackId::D1A);
    EXPECT_EQ(cks.detail, "bootloader load gadget");
    EXPECT_DOUBLE_EQ(cks.coverage_percent, 100.0);
    EXPECT_TRUE(cks.transcript.contains_op("single_step"));
    auto vf = attack(profile_for("GD32VF103"), AttackId::D1A);
    EXPECT_EQ(vf.detail, "SRAM-resident load loop");
    EXPECT_DOUBLE_EQ(vf.coverage_percent, 100.0);
    EXPECT_EQ(attack(profile_for("STM32F103"), AttackId::D1A).status, AttackStatus::NOT_VULNERABLE);
}

TEST(Exploits, D1bCoverageEqualsAnalytic) {
    for (const char* n : {"STM32F103", "APM32F103", "CKS32F103"}) {
        const auto& p = profile_for(n);
        auto r = attack(p, AttackId::D1B);
        EXPECT_EQ(r.valid, compute_coverage(p).readable) << n;
    }
}

TEST(Exploits, D1cNeverSetsDebugEnable) {
    auto r = attack(profile_for("GD32F103"), AttackId::D1C);
    EXPECT_DOUBLE_EQ(r.coverage_percent, 100.0);
    EXPECT_FALSE(r.transcript.contains_op("set_c_debugen"));
    EXPECT_FALSE(r.transcript.contains_op("halt"));
}

TEST(Exploits, D1cAfterDebugEnableLosesPrecondition) {
    const auto& p = profile_for("GD32F103");
    auto t = make_target(p, 0x1234);
    t.dev->set_c_debugen(true);
    AttackRig rig(*t.dev);
    auto r = exploit_d1c(rig, {});
    EXPECT_EQ(r.status, AttackStatus::PRECONDITION_LOST);
    EXPECT_EQ(r.valid_words(), 0u);
}

TEST(Exploits, D2CrashesGd32f103) {
    auto r = attack(profile_for("GD32F103"), AttackId::D2);
    EXPECT_DOUBLE_EQ(r.coverage_percent, 100.0);
    EXPECT_FALSE(r.transcript.contains_op("set_c_debugen"));
    EXPECT_EQ(r.detail, "CPU crashed via unreadable vector table");
    auto cks = attack(profile_for("CKS32F103"), AttackId::D2);
    EXPECT_DOUBLE_EQ(cks.coverage_percent, 100.0);
}

TEST(Exploits, D2AfterDebugEnableFaults) {
    const auto& p = profile_for("GD32F103");
    auto t = make_target(p, 0x1234);
    t.dev->set_c_debugen(true);
    t.dev->set_c_debugen(false);
    AttackRig rig(*t.dev);
    auto r = exploit_d2(rig, {});
    EXPECT_NE(r.status, AttackStatus::SUCCESS);
    EXPECT_EQ(r.valid_words(), 0u);
}

TEST(Exploits, H0RefusedAtLevelTwo) {
    auto r = attack(profile_for("GD32F130"), AttackId::H0, kRdpRawL2);
    EXPECT_EQ(r.status, AttackStatus::NOT_VULNERABLE);
    EXPECT_EQ(r.op_count, 1u);
}

TEST(Exploits, H0ReadsOpenParts) {
    auto r = attack(profile_for("STM32F103"), AttackId::H0, kRdpRawL0);
    EXPECT_EQ(r.status, AttackStatus::SUCCESS);
}

TEST(Exploits, H1BootOnlyTraceIsHalf) {
    AttackOptions o;
    o.touch_all_pages = false;
    auto r = attack(profile_for("GD32F130"), AttackId::H1, 0x1234, o);
    EXPECT_DOUBLE_EQ(r.coverage_percent, 50.0);
    EXPECT_EQ(r.status, AttackStatus::PARTIAL);
    EXPECT_EQ(r.extra["gaps"].size(), 1u);
    auto full = attack(profile_for("GD32F103"), AttackId::H1, 0x1234, o);
    EXPECT_DOUBLE_EQ(full.coverage_percent, 100.0);
}

TEST(Exploits, H1InferredMatrices) {
    AttackOptions o;
    o.infer_matrices = true;
    for (const char* n : {"GD32F103", "GD32F130"}) {
        Target t;
        auto r = attack(profile_for(n), AttackId::H1, 0x1234, o, &t);
        EXPECT_TRUE(r.extra["inferred_matches_profile"].get<bool>()) << n;
        EXPECT_DOUBLE_EQ(r.coverage_percent, 100.0) << n;
        EXPECT_EQ(mismatches(r, t.image), 0u);
    }
}

TEST(Exploits, H2AtLevelTwo) {
    Target t;
    auto r = attack(profile_for("GD32F130"), AttackId::H2, kRdpRawL2, {}, &t);
    EXPECT_EQ(r.status, AttackStatus::SUCCESS);
    EXPECT_DOUBLE_EQ(r.coverage_percent, 100.0);
    EXPECT_EQ(mismatches(r, t.image), 0u);
    EXPECT_EQ(t.dev->stored_option_raw(), kRdpRawL2);
    EXPECT_EQ(r.extra["stored_option_raw"], kRdpRawL2);
}

TEST(Exploits, H2WrongLineFails) {
    AttackOptions o;
    o.injector = h2_address_injector();
    o.injector->line = QspiLine::IO1;
    auto r = attack(profile_for("GD32F130"), AttackId::H2, kRdpRawL2, o);
    EXPECT_EQ(r.status, AttackStatus::FAILED);
    EXPECT_EQ(r.valid_words(), 0u);
}

TEST(Exploits, H3NeedsShortGlitch) {
    const auto& p = profile_for("STM32F103");
    EXPECT_DOUBLE_EQ(attack(p, AttackId::H3).coverage_percent, 100.0);
    AttackOptions longer;
    longer.glitch_us = 2 * p.sram_remanence_us;
    EXPECT_EQ(attack(p, AttackId::H3, 0x1234, longer).status, AttackStatus::GLITCH_FAILED);
    AttackOptions edge;
    edge.glitch_us = p.sram_remanence_us;
    EXPECT_EQ(attack(p, AttackId::H3, 0x1234, edge).status, AttackStatus::SUCCESS);
    edge.glitch_us = p.sram_remanence_us + 1;
    EXPECT_EQ(attack(p, AttackId::H3, 0x1234, edge).status, AttackStatus::GLITCH_FAILED);
}

TEST(Exploits, H3WithoutGlitchFaults) {
    AttackOptions o;
    o.skip_glitch = true;
    auto r = attack(profile_for("APM32F103"), AttackId::H3, 0x1234, o);
    EXPECT_EQ(r.status, AttackStatus::FAILED);
    EXPECT_EQ(r.valid_words(), 0u);
    EXPECT_EQ(r.detail, "stage 2 ran but flash reads faulted");
}

TEST(Exploits, ReportsAreDeterministic) {
    for (auto id : {AttackId::D1B, AttackId::H1, AttackId::H3}) {
        const auto& p = profile_for(id == AttackId::H1 ? "GD32F130" : "STM32F103");
        auto a = attack(p, id), b = attack(p, id);
        EXPECT_EQ(report_to_json(a).dump(), report_to_json(b).dump());
        EXPECT_EQ(a.recovered, b.recovered);
        EXPECT_EQ(a.transcript.to_json().dump(), b.transcript.to_json().dump());
    }
}

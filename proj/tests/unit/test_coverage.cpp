#include <gtest/gtest.h>

#include <chrono>

#include "rdpsim/coverage.hpp"
#include "rdpsim/exploits.hpp"

using namespace rdpsim;

namespace {

// Plain enumeration of every word an exception entry can fetch.
std::vector<bool> oracle_bitmap(const DeviceProfile& p, const std::set<int>& system, uint32_t gran) {
    std::vector<bool> bits(p.flash_words(), false);
    std::vector<int> exc(system.begin(), system.end());
    for (uint32_t n = 16; n < p.vector_table_entries(); ++n)
        exc.push_back(int(n));
    for (uint32_t v = 0; v < p.flash_size; v += gran)
        for (int n : exc) {
            uint32_t a = v | (4u * n);
            if (a < p.flash_size)
                bits[a / 4] = true;
        }
    return bits;
}

double percent(const std::vector<bool>& b) {
    return 100.0 * double(std::count(b.begin(), b.end(), true)) / double(b.size());
}

}  // namespace

TEST(Coverage, PublishedFigures) {
    EXPECT_NEAR(compute_coverage(profile_for("STM32F103")).percent, 89.1, 1.0);
    EXPECT_NEAR(compute_coverage(profile_for("APM32F103")).percent, 93.8, 1.0);
    EXPECT_NEAR(compute_coverage(profile_for("CKS32F103")).percent, 93.8, 1.0);
}

TEST(Coverage, SharedCalibration) {
    const auto& a = profile_for("STM32F103").d1b_params;
    for (const char* n : {"APM32F103", "CKS32F103"}) {
        const auto& b = profile_for(n).d1b_params;
        EXPECT_EQ(a.vtor_granularity, b.vtor_granularity);
        EXPECT_EQ(a.max_pendable_irq, b.max_pendable_irq);
        EXPECT_EQ(a.wrap_mode, b.wrap_mode);
        EXPECT_EQ(a.vector_addressing, b.vector_addressing);
    }
}

TEST(Coverage, MatchesEnumerationOracle) {
    const std::set<int> rev1{2, 12, 14, 15}, rev2{2, 4, 5, 6, 11, 12, 14, 15};
    for (const char* n : {"STM32F103", "APM32F103", "CKS32F103"}) {
        const auto& p = profile_for(n);
        auto want = oracle_bitmap(p, p.core_revision == 1 ? rev1 : rev2, 0x80);
        auto got = compute_coverage(p);
        EXPECT_EQ(got.readable, want) << n;
        EXPECT_DOUBLE_EQ(got.percent, percent(want));
    }
    EXPECT_DOUBLE_EQ(percent(oracle_bitmap(profile_for("STM32F103"), rev1, 0x80)), 89.0625);
}

TEST(Coverage, NoVtorMeansNothing) {
    EXPECT_EQ(compute_coverage(profile_for("GD32VF103")).readable_words, 0u);
}

TEST(Coverage, AddAddressingAndWrapModes) {
    auto p = mini_profile(profile_for("STM32F103"), 4096);
    p.d1b_params.vector_addressing = VectorAddressing::ADD;
    auto add = compute_coverage(p);
    // ADD reaches V + 4n, which crosses into the next granule.
    EXPECT_TRUE(add.readable[(0x80 + 4 * 40) / 4]);
    p.d1b_params.wrap_mode = WrapMode::MOD_TABLE;
    EXPECT_GE(compute_coverage(p).readable_words, add.readable_words);
    EXPECT_EQ(effective_table_index(p, 16 + 70), std::optional<uint32_t>((16 + 70) % p.vector_table_entries()));
    p.d1b_params.wrap_mode = WrapMode::MAP_TO_START;
    EXPECT_EQ(effective_table_index(p, 16 + 70), std::optional<uint32_t>(16 + 70 - p.vector_table_entries()));
    p.d1b_params.wrap_mode = WrapMode::NONE;
    EXPECT_FALSE(effective_table_index(p, 16 + 70));
}

TEST(Coverage, FastEnough) {
    auto t0 = std::chrono::steady_clock::now();
    for (const char* n : {"STM32F103", "APM32F103", "CKS32F103"})
        compute_coverage(profile_for(n));
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 5.0);
}

// Analytic bitmap equals what the exception-entry attack recovers.
TEST(Coverage, AttackRecoversExactlyTheAnalyticSet) {
    for (const char* n : {"STM32F103", "APM32F103", "CKS32F103"}) {
        auto p = mini_profile(profile_for(n), 4096);
        Device d(p, 2);
        auto img = random_victim_image(p, 17);
        d.provision(img, 0x1234);
        d.apply_power_event(PowerEvent::power_on());
        AttackRig rig(d);
        auto r = exploit_d1b(rig, {});
        EXPECT_EQ(r.valid, compute_coverage(p).readable) << n;
        for (size_t w = 0; w < r.valid.size(); ++w)
            if (r.valid[w])
                ASSERT_EQ(read_le32(r.recovered, 4 * w), read_le32(img, 4 * w)) << n << " word " << w;
    }
}

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "rdpsim/deobf.hpp"
#include "rdpsim/gf2.hpp"
#include "rdpsim/profiles.hpp"

using namespace rdpsim;

namespace {

nlohmann::json fixtures() {
    std::ifstream f(std::string(RDPSIM_FIXTURE_DIR) + "/matrices.json");
    return nlohmann::json::parse(f);
}

// Fixture rows are bit strings; the library takes rows of 0/1 integers.
nlohmann::json as_matrix(const nlohmann::json& rows) {
    nlohmann::json m = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json row = nlohmann::json::array();
        for (char c : r.get<std::string>())
            row.push_back(c == '1' ? 1 : 0);
        m.push_back(row);
    }
    return m;
}

// Independent reading of a matrix: column index of the one in each row.
std::array<int, 8> columns(const nlohmann::json& rows) {
    std::array<int, 8> c{};
    for (int r = 0; r < 8; ++r) {
        auto s = rows[r].get<std::string>();
        c[r] = int(s.find('1'));
    }
    return c;
}

// a_P = P * a_L with MSB-first bit vectors [a9 .. a2].
uint32_t apply_rows(const std::array<int, 8>& col, uint32_t offset) {
    uint32_t in = (offset >> 2) & 0xFF, out = 0;
    for (int r = 0; r < 8; ++r)
        if (in & (0x80u >> col[r]))
            out |= 0x80u >> r;
    return out << 2;
}

Gf2Perm8 random_perm(std::mt19937_64& rng) {
    std::array<int, 8> src{0, 1, 2, 3, 4, 5, 6, 7};
    std::shuffle(src.begin(), src.end(), rng);
    return Gf2Perm8::from_columns(src);
}

}  // namespace

TEST(Gf2, ProfileMatricesMatchFixtures) {
    auto fx = fixtures();
    const auto& k103 = profile_for("GD32F103").obfuscation->key;
    const auto& k130 = profile_for("GD32F130").obfuscation->key;
    EXPECT_EQ(k103.word_perm, perm_from_json(as_matrix(fx["word_permutation"]["GD32F103"])));
    EXPECT_EQ(k130.word_perm, perm_from_json(as_matrix(fx["word_permutation"]["GD32F130"])));
    const char* names[4] = {"alpha", "beta", "gamma", "delta"};
    for (int i = 0; i < 4; ++i) {
        EXPECT_EQ(k103.bit_perms[i], perm_from_json(as_matrix(fx["bit_permutation"][names[i]]))) << names[i];
        EXPECT_EQ(k130.bit_perms[i], k103.bit_perms[i]) << names[i];
    }
}

TEST(Gf2, DeltaReconstructionDropsDuplicateRow) {
    auto fx = fixtures();
    auto printed = fx["delta_as_printed"];
    ASSERT_EQ(printed.size(), 9u);
    EXPECT_EQ(printed[5], printed[6]);
    nlohmann::json fixed = nlohmann::json::array();
    for (size_t i = 0; i < printed.size(); ++i)
        if (i != 6)
            fixed.push_back(printed[i]);
    EXPECT_EQ(fixed, fx["bit_permutation"]["delta"]);
    EXPECT_EQ(columns(fixed), (std::array<int, 8>{6, 2, 3, 5, 1, 4, 0, 7}));
}

TEST(Gf2, ShippedMatricesAreOrthogonal) {
    for (auto d : all_devices()) {
        const auto& p = profile_for(d);
        if (!p.obfuscation)
            continue;
        std::vector<Gf2Perm8> ms{p.obfuscation->key.word_perm};
        ms.insert(ms.end(), p.obfuscation->key.bit_perms.begin(), p.obfuscation->key.bit_perms.end());
        for (const auto& m : ms) {
            // P * P^T computed with the generic GF(2) product.
            auto t = m.inverse().rows();
            auto prod = gf2_matmul(m.rows(), t);
            EXPECT_TRUE(Gf2Perm8::from_rows(prod).is_identity());
            for (int r = 0; r < 8; ++r)
                for (int c = 0; c < 8; ++c)
                    EXPECT_EQ(m.inverse().bit(r, c), m.bit(c, r));
        }
    }
}

TEST(Gf2, F130WordOffsetExample) {
    auto col = columns(fixtures()["word_permutation"]["GD32F130"]);
    // a_L2 is the last vector entry; its row in the matrix maps it to a_P4.
    EXPECT_EQ(apply_rows(col, 0x004), 0x010u);
    const auto& key = profile_for("GD32F130").obfuscation->key;
    for (uint32_t off = 0; off < 1024; off += 4)
        EXPECT_EQ(permute_page_offset(key.word_perm, off), apply_rows(col, off)) << off;
}

TEST(Gf2, F130SecondColumnMapsL8ToP9) {
    auto col = columns(fixtures()["word_permutation"]["GD32F130"]);
    EXPECT_EQ(col[0], 1);  // top row 0 1 0 0 0 0 0 0
    EXPECT_EQ(apply_rows(col, 0x100), 0x200u);
}

TEST(Gf2, BusMsbCarriesBit27) {
    // First byte on the bus uses P_alpha; the data sheet words are big endian.
    const auto& a = profile_for("GD32F103").obfuscation->key.bit_perms[0];
    int logical_bit_in_byte = a.source_bit(7);
    EXPECT_EQ(24 + logical_bit_in_byte, 27);
    std::array<uint32_t, 5> resp = synthesize_bit_responses(profile_for("GD32F103").obfuscation->key.bit_perms);
    int pattern = 0;
    for (int t = 0; t < 5; ++t)
        pattern = pattern << 1 | int(resp[t] >> 31);
    EXPECT_EQ(pattern, 0b11011);
}

TEST(Gf2, InfersPublishedWordPermutations) {
    auto fx = fixtures();
    for (const char* dev : {"GD32F103", "GD32F130"}) {
        auto col = columns(fx["word_permutation"][dev]);
        // Observations built from the fixture, not from the library.
        std::vector<WordObservation> obs;
        for (uint32_t off : kWordProbeOffsets)
            obs.push_back({off, apply_rows(col, off)});
        EXPECT_EQ(infer_word_permutation(obs), perm_from_json(as_matrix(fx["word_permutation"][dev]))) << dev;
    }
}

TEST(Gf2, InfersPublishedBitPermutations) {
    auto fx = fixtures();
    std::array<Gf2Perm8, 4> want;
    const char* names[4] = {"alpha", "beta", "gamma", "delta"};
    std::array<std::array<int, 8>, 4> cols;
    for (int i = 0; i < 4; ++i) {
        want[i] = perm_from_json(as_matrix(fx["bit_permutation"][names[i]]));
        cols[i] = columns(fx["bit_permutation"][names[i]]);
    }
    // Bus words for the five test patterns, from the fixture rows: bus bit
    // (7-r) of byte k takes logical bit (7-col[r]) of that byte.
    std::array<uint32_t, 5> resp{};
    for (int t = 0; t < 5; ++t) {
        uint32_t w = kBitTestWords[t], out = 0;
        for (int k = 0; k < 4; ++k) {
            uint8_t in = uint8_t(w >> (24 - 8 * k)), o = 0;
            for (int r = 0; r < 8; ++r)
                if (in & (0x80u >> cols[k][r]))
                    o |= uint8_t(0x80u >> r);
            out |= uint32_t(o) << (24 - 8 * k);
        }
        resp[t] = out;
    }
    EXPECT_EQ(resp, synthesize_bit_responses(want));
    EXPECT_EQ(infer_bit_permutation(resp), want);
}

TEST(Gf2, RandomPermutationSetsRoundTrip) {
    std::mt19937_64 rng(20240611);
    for (int i = 0; i < 1000; ++i) {
        ObfuscationKey k;
        k.word_perm = random_perm(rng);
        for (auto& b : k.bit_perms)
            b = random_perm(rng);
        ASSERT_EQ(infer_word_permutation(synthesize_word_observations(k.word_perm)), k.word_perm) << i;
        ASSERT_EQ(infer_bit_permutation(synthesize_bit_responses(k.bit_perms)), k.bit_perms) << i;
    }
}

TEST(Gf2, InferenceRejectsNonBijective) {
    std::array<uint32_t, 5> resp{};  // every bit maps to index 0
    EXPECT_THROW(infer_bit_permutation(resp), InferenceError);
    std::vector<WordObservation> obs;
    for (uint32_t off : kWordProbeOffsets)
        obs.push_back({off, 0x004});
    EXPECT_THROW(infer_word_permutation(obs), InferenceError);
    EXPECT_THROW(Gf2Perm8::from_rows({0x80, 0x80, 0x20, 0x10, 0x08, 0x04, 0x02, 0x01}),
                 std::invalid_argument);
}

TEST(Gf2, PageObfuscationRoundTrip) {
    std::mt19937_64 rng(5);
    const auto& key = profile_for("GD32F130").obfuscation->key;
    std::vector<uint8_t> page(1024);
    for (auto& b : page)
        b = uint8_t(rng());
    auto phys = obfuscate_page_bytes(key, page);
    EXPECT_NE(phys, page);
    EXPECT_EQ(deobfuscate_page_bytes(key, phys), page);
    // Hamming weight per word is preserved.
    for (uint32_t off = 0; off < 1024; off += 4) {
        uint32_t lw = 0, pw = 0;
        for (int k = 0; k < 4; ++k) {
            lw += std::popcount(page[off + k]);
            pw += std::popcount(phys[permute_page_offset(key.word_perm, off) + k]);
        }
        EXPECT_EQ(lw, pw);
    }
}

TEST(Gf2, MatmulAgreesWithCompose) {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 100; ++i) {
        auto p = random_perm(rng), q = random_perm(rng);
        uint8_t v = uint8_t(rng());
        EXPECT_EQ(p.compose(q).apply(v), p.apply(q.apply(v)));
        EXPECT_EQ(gf2_matvec(p.rows(), v), p.apply(v));
        EXPECT_EQ(p.inverse().apply(p.apply(v)), v);
    }
}

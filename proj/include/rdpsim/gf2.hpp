#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace rdpsim {

class InferenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// 8x8 permutation matrix over GF(2).
//
// Vectors are MSB-first: row/column 0 is bit 7 of the packed byte. Row r
// having its one in column c means output bit (7-r) takes input bit (7-c).
class Gf2Perm8 {
public:
    Gf2Perm8();  // identity

    // Each row given as 8 bits, MSB = column 0. Throws std::invalid_argument
    // if the rows do not form a permutation.
    static Gf2Perm8 from_rows(const std::array<uint8_t, 8>& rows);
    // src[r] = column index of the one in row r.
    static Gf2Perm8 from_columns(const std::array<int, 8>& src);
    // Output bit j (LSB numbering) receives input bit src_bit[j].
    static Gf2Perm8 from_bit_sources(const std::array<int, 8>& src_bit);

    uint8_t apply(uint8_t v) const;
    Gf2Perm8 inverse() const;
    Gf2Perm8 compose(const Gf2Perm8& q) const;  // this * q

    bool bit(int r, int c) const { return (rows_[r] >> (7 - c)) & 1; }
    const std::array<uint8_t, 8>& rows() const { return rows_; }
    int column_of_row(int r) const;
    // Input bit (LSB numbering) feeding output bit j.
    int source_bit(int j) const { return 7 - column_of_row(7 - j); }
    bool is_identity() const;

    bool operator==(const Gf2Perm8& o) const { return rows_ == o.rows_; }
    bool operator!=(const Gf2Perm8& o) const { return rows_ != o.rows_; }

    std::string to_string() const;

private:
    std::array<uint8_t, 8> rows_{};
};

inline uint8_t apply(const Gf2Perm8& p, uint8_t v) { return p.apply(v); }
inline Gf2Perm8 invert(const Gf2Perm8& p) { return p.inverse(); }
inline Gf2Perm8 compose(const Gf2Perm8& p, const Gf2Perm8& q) { return p.compose(q); }

// Generic GF(2) matrix product on packed rows; used to cross-check the
// permutation fast path.
std::array<uint8_t, 8> gf2_matmul(const std::array<uint8_t, 8>& a,
                                  const std::array<uint8_t, 8>& b);
uint8_t gf2_matvec(const std::array<uint8_t, 8>& m, uint8_t v);

// Word permutation plus one bit permutation per addr[1:0] class.
struct ObfuscationKey {
    Gf2Perm8 word_perm;
    std::array<Gf2Perm8, 4> bit_perms;

    bool operator==(const ObfuscationKey& o) const {
        return word_perm == o.word_perm && bit_perms == o.bit_perms;
    }
};

// In-page offsets (bytes) carrying the word-address probes, a_L2 .. a_L9.
constexpr std::array<uint32_t, 8> kWordProbeOffsets = {
    0x004, 0x008, 0x010, 0x020, 0x040, 0x080, 0x100, 0x200};

// Big-endian test words; bit i of the word set in test t iff bit (4-t) of i.
constexpr std::array<uint32_t, 5> kBitTestWords = {
    0xFFFF0000u, 0xFF00FF00u, 0xF0F0F0F0u, 0xCCCCCCCCu, 0xAAAAAAAAu};

// Maps a 1 KiB page offset through the word permutation (bits [9:2]).
uint32_t permute_page_offset(const Gf2Perm8& word_perm, uint32_t offset);

std::vector<uint8_t> obfuscate_page_bytes(const ObfuscationKey& key,
                                          const std::vector<uint8_t>& logical);
std::vector<uint8_t> deobfuscate_page_bytes(const ObfuscationKey& key,
                                            const std::vector<uint8_t>& physical);

// (logical probe offset, physical offset where the marker was seen)
using WordObservation = std::pair<uint32_t, uint32_t>;

Gf2Perm8 infer_word_permutation(const std::vector<WordObservation>& observations);

// responses[t] is the big-endian bus word seen for kBitTestWords[t].
std::array<Gf2Perm8, 4> infer_bit_permutation(const std::array<uint32_t, 5>& responses);

// Helpers to synthesize what the bus would show; used by tests and twins.
std::vector<WordObservation> synthesize_word_observations(const Gf2Perm8& word_perm);
std::array<uint32_t, 5> synthesize_bit_responses(const std::array<Gf2Perm8, 4>& bit_perms);

nlohmann::json to_json(const Gf2Perm8& p);
Gf2Perm8 perm_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ObfuscationKey& k);
ObfuscationKey key_from_json(const nlohmann::json& j);

}  // namespace rdpsim

#include "rdpsim/gf2.hpp"

#include <bit>
#include <sstream>

namespace rdpsim {

namespace {

bool rows_are_permutation(const std::array<uint8_t, 8>& rows) {
    uint8_t seen = 0;
    for (uint8_t r : rows) {
        if (std::popcount(r) != 1 || (seen & r))
            return false;
        seen |= r;
    }
    return seen == 0xFF;
}

}  // namespace

Gf2Perm8::Gf2Perm8() {
    for (int r = 0; r < 8; ++r)
        rows_[r] = static_cast<uint8_t>(0x80 >> r);
}

Gf2Perm8 Gf2Perm8::from_rows(const std::array<uint8_t, 8>& rows) {
    if (!rows_are_permutation(rows))
        throw std::invalid_argument("matrix is not a permutation");
    Gf2Perm8 p;
    p.rows_ = rows;
    return p;
}

Gf2Perm8 Gf2Perm8::from_columns(const std::array<int, 8>& src) {
    std::array<uint8_t, 8> rows{};
    for (int r = 0; r < 8; ++r) {
        if (src[r] < 0 || src[r] > 7)
            throw std::invalid_argument("column index out of range");
        rows[r] = static_cast<uint8_t>(0x80 >> src[r]);
    }
    return from_rows(rows);
}

Gf2Perm8 Gf2Perm8::from_bit_sources(const std::array<int, 8>& src_bit) {
    std::array<int, 8> cols{};
    for (int j = 0; j < 8; ++j) {
        if (src_bit[j] < 0 || src_bit[j] > 7)
            throw std::invalid_argument("bit index out of range");
        cols[7 - j] = 7 - src_bit[j];
    }
    return from_columns(cols);
}

uint8_t Gf2Perm8::apply(uint8_t v) const {
    uint8_t out = 0;
    for (int r = 0; r < 8; ++r)
        if (v & rows_[r])
            out |= static_cast<uint8_t>(0x80 >> r);
    return out;
}

Gf2Perm8 Gf2Perm8::inverse() const {
    std::array<uint8_t, 8> t{};
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c)
            if (bit(r, c))
                t[c] |= static_cast<uint8_t>(0x80 >> r);
    Gf2Perm8 p;
    p.rows_ = t;
    return p;
}

Gf2Perm8 Gf2Perm8::compose(const Gf2Perm8& q) const {
    return from_rows(gf2_matmul(rows_, q.rows_));
}

int Gf2Perm8::column_of_row(int r) const {
    return std::countl_zero(rows_[r]);
}

bool Gf2Perm8::is_identity() const {
    return *this == Gf2Perm8();
}

std::string Gf2Perm8::to_string() const {
    std::ostringstream os;
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c)
            os << (bit(r, c) ? '1' : '0') << (c < 7 ? " " : "");
        os << '\n';
    }
    return os.str();
}

std::array<uint8_t, 8> gf2_matmul(const std::array<uint8_t, 8>& a,
                                  const std::array<uint8_t, 8>& b) {
    std::array<uint8_t, 8> out{};
    for (int r = 0; r < 8; ++r) {
        uint8_t acc = 0;
        for (int k = 0; k < 8; ++k)
            if ((a[r] >> (7 - k)) & 1)
                acc ^= b[k];
        out[r] = acc;
    }
    return out;
}

uint8_t gf2_matvec(const std::array<uint8_t, 8>& m, uint8_t v) {
    uint8_t out = 0;
    for (int r = 0; r < 8; ++r)
        if (std::popcount(static_cast<uint8_t>(m[r] & v)) & 1)
            out |= static_cast<uint8_t>(0x80 >> r);
    return out;
}

uint32_t permute_page_offset(const Gf2Perm8& word_perm, uint32_t offset) {
    uint32_t word = (offset >> 2) & 0xFF;
    return (offset & ~0x3FFu) | (uint32_t(word_perm.apply(uint8_t(word))) << 2) | (offset & 3);
}

std::vector<uint8_t> obfuscate_page_bytes(const ObfuscationKey& key,
                                          const std::vector<uint8_t>& logical) {
    if (logical.size() != 1024)
        throw std::invalid_argument("page must be 1024 bytes");
    std::vector<uint8_t> out(1024);
    for (uint32_t o = 0; o < 1024; ++o)
        out[permute_page_offset(key.word_perm, o)] = key.bit_perms[o & 3].apply(logical[o]);
    return out;
}

std::vector<uint8_t> deobfuscate_page_bytes(const ObfuscationKey& key,
                                            const std::vector<uint8_t>& physical) {
    if (physical.size() != 1024)
        throw std::invalid_argument("page must be 1024 bytes");
    ObfuscationKey inv{key.word_perm.inverse(),
                       {key.bit_perms[0].inverse(), key.bit_perms[1].inverse(),
                        key.bit_perms[2].inverse(), key.bit_perms[3].inverse()}};
    return obfuscate_page_bytes(inv, physical);
}

Gf2Perm8 infer_word_permutation(const std::vector<WordObservation>& observations) {
    if (observations.size() != kWordProbeOffsets.size())
        throw InferenceError("expected 8 probe observations, got " +
                             std::to_string(observations.size()));
    std::array<int, 8> src_of_out{-1, -1, -1, -1, -1, -1, -1, -1};
    std::array<bool, 8> probe_seen{};
    for (const auto& [logical, physical] : observations) {
        int k = -1;
        for (int i = 0; i < 8; ++i)
            if (kWordProbeOffsets[i] == logical)
                k = i;
        std::string probe = "probe 0x" + [&] {
            std::ostringstream os;
            os << std::hex << logical;
            return os.str();
        }();
        if (k < 0)
            throw InferenceError(probe + " is not a single-bit word offset");
        if (probe_seen[k])
            throw InferenceError(probe + " observed twice");
        probe_seen[k] = true;
        if ((physical & 3) || physical >= 1024 || std::popcount(physical) != 1)
            throw InferenceError(probe + " maps to a non single-bit physical offset");
        int m = std::countr_zero(physical) - 2;
        if (src_of_out[m] >= 0)
            throw InferenceError(probe + " collides with probe 0x" + [&] {
                std::ostringstream os;
                os << std::hex << kWordProbeOffsets[src_of_out[m]];
                return os.str();
            }() + " on physical bit a" + std::to_string(m + 2));
        src_of_out[m] = k;
    }
    return Gf2Perm8::from_bit_sources(src_of_out);
}

std::array<Gf2Perm8, 4> infer_bit_permutation(const std::array<uint32_t, 5>& responses) {
    // Physical bit position p (0..31, LSB numbering of the big-endian word)
    // carries logical bit src[p], read off the 5-bit column.
    std::array<int, 32> src{};
    for (int p = 0; p < 32; ++p) {
        int idx = 0;
        for (int t = 0; t < 5; ++t)
            idx = (idx << 1) | int((responses[t] >> p) & 1);
        src[p] = idx;
    }
    std::array<Gf2Perm8, 4> out;
    for (int b = 0; b < 4; ++b) {
        int shift = 24 - 8 * b;  // byte b of a big-endian word
        std::array<int, 8> bits{};
        for (int j = 0; j < 8; ++j) {
            int s = src[shift + j] - shift;
            if (s < 0 || s > 7)
                throw InferenceError("physical bit " + std::to_string(shift + j) +
                                     " sources logical bit " + std::to_string(src[shift + j]) +
                                     " outside its byte");
            bits[j] = s;
        }
        try {
            out[b] = Gf2Perm8::from_bit_sources(bits);
        } catch (const std::invalid_argument&) {
            throw InferenceError("bit mapping for byte lane " + std::to_string(b) +
                                 " is not bijective");
        }
    }
    return out;
}

std::vector<WordObservation> synthesize_word_observations(const Gf2Perm8& word_perm) {
    std::vector<WordObservation> obs;
    for (uint32_t off : kWordProbeOffsets)
        obs.emplace_back(off, permute_page_offset(word_perm, off));
    return obs;
}

std::array<uint32_t, 5> synthesize_bit_responses(const std::array<Gf2Perm8, 4>& bit_perms) {
    std::array<uint32_t, 5> out{};
    for (int t = 0; t < 5; ++t) {
        uint32_t w = kBitTestWords[t];
        uint32_t r = 0;
        for (int b = 0; b < 4; ++b) {
            int shift = 24 - 8 * b;
            r |= uint32_t(bit_perms[b].apply(uint8_t(w >> shift))) << shift;
        }
        out[t] = r;
    }
    return out;
}

nlohmann::json to_json(const Gf2Perm8& p) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < 8; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < 8; ++c)
            row.push_back(p.bit(r, c) ? 1 : 0);
        rows.push_back(row);
    }
    return rows;
}

Gf2Perm8 perm_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 8)
        throw std::invalid_argument("matrix must have 8 rows");
    std::array<uint8_t, 8> rows{};
    for (int r = 0; r < 8; ++r) {
        const auto& row = j[r];
        if (!row.is_array() || row.size() != 8)
            throw std::invalid_argument("matrix row must have 8 entries");
        for (int c = 0; c < 8; ++c) {
            int v = row[c].get<int>();
            if (v != 0 && v != 1)
                throw std::invalid_argument("matrix entries must be 0 or 1");
            if (v)
                rows[r] |= static_cast<uint8_t>(0x80 >> c);
        }
    }
    return Gf2Perm8::from_rows(rows);
}

nlohmann::json to_json(const ObfuscationKey& k) {
    return {{"word_perm", to_json(k.word_perm)},
            {"bit_perms",
             {to_json(k.bit_perms[0]), to_json(k.bit_perms[1]), to_json(k.bit_perms[2]),
              to_json(k.bit_perms[3])}}};
}

ObfuscationKey key_from_json(const nlohmann::json& j) {
    ObfuscationKey k;
    k.word_perm = perm_from_json(j.at("word_perm"));
    const auto& bp = j.at("bit_perms");
    if (!bp.is_array() || bp.size() != 4)
        throw std::invalid_argument("bit_perms must list 4 matrices");
    for (int b = 0; b < 4; ++b)
        k.bit_perms[b] = perm_from_json(bp[b]);
    return k;
}

}  // namespace rdpsim

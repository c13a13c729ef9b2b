#include "rdpsim/coverage.hpp"

namespace rdpsim {

std::optional<uint32_t> effective_table_index(const DeviceProfile& p, int n) {
    uint32_t t = p.vector_table_entries();
    if (n < 0)
        return std::nullopt;
    if (uint32_t(n) < t)
        return uint32_t(n);
    switch (p.d1b_params.wrap_mode) {
    case WrapMode::MOD_TABLE: return uint32_t(n) % t;
    case WrapMode::MAP_TO_START: return uint32_t(n) - t;
    case WrapMode::NONE: break;
    }
    return std::nullopt;
}

std::set<uint32_t> reachable_table_indices(const DeviceProfile& p) {
    const auto& c = p.d1b_params;
    std::set<uint32_t> out;
    auto add = [&](int n) {
        if (auto i = effective_table_index(p, n))
            out.insert(*i);
    };
    for (int n : c.usable_system_exceptions)
        add(n);
    for (uint32_t k = 0; k < c.max_pendable_irq; ++k)
        add(16 + int(k));
    return out;
}

uint32_t vector_fetch_address(const CoverageParams& c, uint32_t vtor, uint32_t index) {
    return c.vector_addressing == VectorAddressing::OR ? (vtor | 4 * index) : vtor + 4 * index;
}

CoverageReport compute_coverage(const DeviceProfile& p) {
    CoverageReport rep;
    rep.total_words = p.flash_words();
    rep.readable.assign(rep.total_words, false);
    if (!p.has_vtor || p.d1b_params.vtor_granularity == 0) {
        return rep;
    }
    auto indices = reachable_table_indices(p);
    for (uint32_t v = 0; v < p.flash_size; v += p.d1b_params.vtor_granularity) {
        for (uint32_t i : indices) {
            uint32_t a = vector_fetch_address(p.d1b_params, v, i);
            if (a < p.flash_size)
                rep.readable[a / 4] = true;
        }
    }
    for (bool b : rep.readable)
        rep.readable_words += b;
    rep.percent = rep.total_words ? 100.0 * rep.readable_words / rep.total_words : 0.0;
    return rep;
}

}  // namespace rdpsim

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "rdpsim/profiles.hpp"

namespace rdpsim {

struct CoverageReport {
    std::vector<bool> readable;  // one entry per flash word
    uint32_t readable_words = 0;
    uint32_t total_words = 0;
    double percent = 0.0;
};

// Vector-table indices reachable by pending exceptions under the profile's
// wrap mode. Exceptions whose index faults are left out.
std::set<uint32_t> reachable_table_indices(const DeviceProfile& p);

// Table index for exception n, or nothing if the entry faults.
std::optional<uint32_t> effective_table_index(const DeviceProfile& p, int n);

// Fetch address of table entry `index` for a table based at `vtor`.
uint32_t vector_fetch_address(const CoverageParams& c, uint32_t vtor, uint32_t index);

CoverageReport compute_coverage(const DeviceProfile& p);

}  // namespace rdpsim

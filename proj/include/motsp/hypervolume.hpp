#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "motsp/core.hpp"

namespace motsp {

struct HvResult {
    double value = 0.0;
    std::string method;  // "exact-sweep", "exact-slicing" or "monte-carlo"
};

/// Exact 2-D hypervolume by sorted sweep. Points at or beyond the reference
/// contribute nothing; an empty front gives 0.
double hypervolume_2d(const std::vector<ObjectiveVector>& front, const ObjectiveVector& ref);

/// Seeded Monte Carlo estimate (used as the large-front fallback for M >= 3).
double hypervolume_monte_carlo(const std::vector<ObjectiveVector>& front, const ObjectiveVector& ref,
                               long samples, std::uint64_t seed);

/// Hypervolume dominated by `front` and bounded by `ref` (minimization).
/// M=2 uses the exact sweep; M>=3 uses exact recursive slicing up to
/// `exact_limit` points and a seeded 1e6-sample Monte Carlo estimate beyond.
HvResult hypervolume(const std::vector<ObjectiveVector>& front, const ObjectiveVector& ref,
                     int exact_limit = 200);

/// Shared benchmark reference point: 1.1 * componentwise maximum over the
/// union of all fronts in a comparison.
ObjectiveVector hv_reference(const std::vector<std::vector<ObjectiveVector>>& fronts);

}  // namespace motsp

#pragma once

#include <string>
#include <vector>

#include "motsp/errors.hpp"

namespace motsp {

/// One cost function of a multi-objective TSP instance. Each objective reads a
/// disjoint slice of every city's feature row: a 2-D coordinate pair
/// (euclidean2d) or a single scalar attribute (scalar_diff, e.g. altitude).
enum class ObjectiveKind { euclidean2d, scalar_diff };

struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::euclidean2d;
    int feature_offset = 0;
    int feature_width = 2;  // 2 for euclidean2d, 1 for scalar_diff
};

int objective_width(ObjectiveKind kind);
std::string objective_kind_name(ObjectiveKind kind);
ObjectiveKind objective_kind_from_name(const std::string& name);

/// A multi-objective TSP instance: n cities, each a D_input-dimensional
/// feature row, plus the M objective descriptors that tile the row.
struct Instance {
    int n = 0;
    int M = 0;
    int d_input = 0;
    std::vector<double> features;  // row-major n x d_input
    std::vector<ObjectiveSpec> specs;
    double scale = 1.0;  // normalization factor; raw values = stored values * scale

    double feature(int city, int column) const { return features[static_cast<size_t>(city) * d_input + column]; }
    const double* row(int city) const { return features.data() + static_cast<size_t>(city) * d_input; }

    /// Throws DomainError if the fields are inconsistent (specs must exactly
    /// tile the feature row, all features finite, n >= 2, M >= 2).
    void validate() const;
};

/// Build an instance from per-city rows; validates.
Instance make_instance(std::vector<ObjectiveSpec> specs, const std::vector<std::vector<double>>& rows);

/// Objective specs for the named instance family:
/// euclidean (M=2, D=4), mixed (M=2, D=3), 3obj (M=3, D=5), 5obj (M=5, D=7).
std::vector<ObjectiveSpec> family_specs(const std::string& family);

struct Tour {
    std::vector<int> order;

    int size() const { return static_cast<int>(order.size()); }
    int operator[](int i) const { return order[i]; }
    bool operator==(const Tour&) const = default;
};

/// True iff order is a permutation of {0..n-1}.
bool is_permutation_tour(const Tour& tour, int n);

using ObjectiveVector = std::vector<double>;
using WeightVector = std::vector<double>;

/// k-th cost of travelling between cities i and j (symmetric).
double edge_cost(const Instance& instance, int k, int i, int j);

/// All M tour costs including the closing edge back to the first city.
ObjectiveVector evaluate_tour(const Instance& instance, const Tour& tour);

/// Weighted-sum scalarization: sum_i lambda_i * f_i.
double weighted_sum(const WeightVector& lambda, const ObjectiveVector& f);

/// Tchebycheff scalarization: max_i lambda_i * |f_i - ideal_i|.
double tchebycheff(const WeightVector& lambda, const ObjectiveVector& f, const ObjectiveVector& ideal);

/// N uniformly spread simplex-lattice weight vectors for M objectives,
/// ordered from (1,0,...,0) toward (0,...,0,1). For M > 2, N must equal
/// C(H+M-1, M-1) for some lattice resolution H; otherwise a ConfigError
/// reporting the nearest feasible N is thrown.
std::vector<WeightVector> generate_weights(int N, int M);

/// Pareto dominance for minimization: a no worse everywhere, better somewhere.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

struct ArchiveEntry {
    Tour tour;
    ObjectiveVector objectives;
    int origin = -1;  // index of the weight vector that produced the tour; -1 if n/a
};

/// Mutually non-dominated set of (tour, objectives) pairs. One representative
/// is kept per identical objective vector.
struct ParetoArchive {
    std::vector<ArchiveEntry> entries;

    int size() const { return static_cast<int>(entries.size()); }
    std::vector<ObjectiveVector> objective_vectors() const;
};

/// Entries of `points` not dominated by any other entry; duplicates in
/// objective space collapse to their first occurrence.
ParetoArchive nondominated_filter(const std::vector<ArchiveEntry>& points);

bool is_mutually_nondominated(const std::vector<ObjectiveVector>& points);

/// Affinely map all feature columns into [0,1] using one shared scale (the
/// largest column extent), so every objective rescales by exactly 1/scale and
/// weighted-sum argmins are preserved. Instances already inside [0,1] are
/// returned unchanged with scale 1.
Instance normalize_instance(const Instance& instance);

}  // namespace motsp

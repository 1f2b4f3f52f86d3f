#pragma once

#include <functional>
#include <vector>

#include "motsp/core.hpp"
#include "motsp/rng.hpp"

namespace motsp {

struct TwoOptConfig {
    bool first_improving = false;  // default: best-improving per neighborhood scan
};

/// Sentinel budget: scan until no 2-opt move improves.
inline constexpr long kTwoOptConverge = -1;

/// 2-opt local search under a weighted-sum scalarization. `budget` counts
/// full neighborhood scans; the scalarized cost never increases.
Tour two_opt(const Instance& instance, const Tour& tour, const WeightVector& lambda, long budget,
             const TwoOptConfig& config = {});

/// Generic-scalarization variant (re-evaluates candidate tours; O(n) slower).
Tour two_opt(const Instance& instance, const Tour& tour,
             const std::function<double(const ObjectiveVector&)>& scalar, long budget,
             const TwoOptConfig& config = {});

/// Deb's fast non-dominated sort; front 0 is the non-dominated set.
std::vector<std::vector<int>> fast_nondominated_sort(const std::vector<ObjectiveVector>& objectives);

/// Canonical crowding distance within one front (+inf at the boundaries).
std::vector<double> crowding_distance(const std::vector<ObjectiveVector>& front);

/// Order crossover: child keeps a's segment [cut_begin, cut_end), the rest
/// filled in b's order starting from cut_end (wrapping).
Tour order_crossover(const Tour& a, const Tour& b, int cut_begin, int cut_end);

/// OX with random cuts followed by inversion mutation with probability p_mut.
Tour variation(Rng& rng, const Tour& parent_a, const Tour& parent_b, double p_mut = 0.2);

ParetoArchive nsga2_run(const Instance& instance, int pop_size, int iterations, Rng& rng,
                        double p_mut = 0.2);

/// T_nbr nearest weight vectors (by Euclidean distance, self included) per
/// weight vector.
std::vector<std::vector<int>> neighborhood_table(const std::vector<WeightVector>& weights, int T_nbr);

struct MoeadTrace {
    std::vector<ObjectiveVector> ideal_by_generation;
};

ParetoArchive moead_run(const Instance& instance, int N, int iterations, int T_nbr, Rng& rng,
                        double p_mut = 0.2, MoeadTrace* trace = nullptr);

struct MOGLSConfig {
    long n_ls = 100;          // 2-opt scan budget per local search
    int temp_pop = 20;        // temporary population size
    int initial = 50;         // initial solutions
    int generations = 200;
    void validate() const;
};

struct MoglsHooks {
    std::function<void(int, const ParetoArchive&)> on_generation;
};

ParetoArchive mogls_run(const Instance& instance, const MOGLSConfig& config, Rng& rng,
                        const MoglsHooks& hooks = {});

/// DRL-MOA+LS: improve each archive entry with one 2-opt descent under its
/// originating weight vector, then re-filter the union with the originals
/// (never decreases hypervolume). `bank_weights` is the bank's weight grid
/// indexed by the entries' `origin`.
ParetoArchive ls_postprocess(const Instance& instance, const ParetoArchive& archive,
                             const std::vector<WeightVector>& bank_weights,
                             long budget = kTwoOptConverge);

}  // namespace motsp

#include "motsp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace motsp {

namespace {

constexpr double kImproveEps = 1e-12;  // strict-improvement guard against fp cycling

std::vector<double> scalar_cost_matrix(const Instance& instance, const WeightVector& lambda) {
    const int n = instance.n;
    std::vector<double> c(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double w = 0.0;
            for (int k = 0; k < instance.M; ++k) w += lambda[k] * edge_cost(instance, k, i, j);
            c[static_cast<size_t>(i) * n + j] = w;
            c[static_cast<size_t>(j) * n + i] = w;
        }
    return c;
}

Tour random_tour(Rng& rng, int n) {
    Tour t;
    t.order.resize(n);
    std::iota(t.order.begin(), t.order.end(), 0);
    rng.shuffle(std::span<int>(t.order));
    return t;
}

}  // namespace

Tour two_opt(const Instance& instance, const Tour& tour, const WeightVector& lambda, long budget,
             const TwoOptConfig& config) {
    if (!is_permutation_tour(tour, instance.n)) throw DomainError("two_opt: invalid tour");
    if (static_cast<int>(lambda.size()) != instance.M) throw DomainError("two_opt: weight dimension mismatch");
    const int n = instance.n;
    std::vector<double> c = scalar_cost_matrix(instance, lambda);
    auto cost = [&](int a, int b) { return c[static_cast<size_t>(a) * n + b]; };

    Tour t = tour;
    long scans = 0;
    while (budget == kTwoOptConverge || scans < budget) {
        ++scans;
        double best_delta = -kImproveEps;
        int best_i = -1, best_j = -1;
        bool applied_first = false;
        for (int i = 0; i < n - 1 && !applied_first; ++i) {
            int a = t.order[i], a_next = t.order[i + 1];
            for (int j = i + 1; j < n; ++j) {
                if (i == 0 && j == n - 1) continue;  // same edge pair
                int b = t.order[j], b_next = t.order[(j + 1) % n];
                double delta = cost(a, b) + cost(a_next, b_next) - cost(a, a_next) - cost(b, b_next);
                if (delta < best_delta) {
                    best_delta = delta;
                    best_i = i;
                    best_j = j;
                    if (config.first_improving) {
                        applied_first = true;
                        break;
                    }
                }
            }
        }
        if (best_i < 0) break;  // local optimum
        std::reverse(t.order.begin() + best_i + 1, t.order.begin() + best_j + 1);
    }
    return t;
}

Tour two_opt(const Instance& instance, const Tour& tour,
             const std::function<double(const ObjectiveVector&)>& scalar, long budget,
             const TwoOptConfig& config) {
    if (!is_permutation_tour(tour, instance.n)) throw DomainError("two_opt: invalid tour");
    const int n = instance.n;
    Tour t = tour;
    double current = scalar(evaluate_tour(instance, t));
    long scans = 0;
    while (budget == kTwoOptConverge || scans < budget) {
        ++scans;
        double best_cost = current - kImproveEps;
        int best_i = -1, best_j = -1;
        bool applied_first = false;
        for (int i = 0; i < n - 1 && !applied_first; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (i == 0 && j == n - 1) continue;
                std::reverse(t.order.begin() + i + 1, t.order.begin() + j + 1);
                double cand = scalar(evaluate_tour(instance, t));
                std::reverse(t.order.begin() + i + 1, t.order.begin() + j + 1);
                if (cand < best_cost) {
                    best_cost = cand;
                    best_i = i;
                    best_j = j;
                    if (config.first_improving) {
                        applied_first = true;
                        break;
                    }
                }
            }
        }
        if (best_i < 0) break;
        std::reverse(t.order.begin() + best_i + 1, t.order.begin() + best_j + 1);
        current = best_cost;
    }
    return t;
}

std::vector<std::vector<int>> fast_nondominated_sort(const std::vector<ObjectiveVector>& objectives) {
    const int n = static_cast<int>(objectives.size());
    std::vector<std::vector<int>> dominated(n);
    std::vector<int> count(n, 0);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            if (p == q) continue;
            if (dominates(objectives[p], objectives[q])) dominated[p].push_back(q);
            else if (dominates(objectives[q], objectives[p])) ++count[p];
        }
    std::vector<std::vector<int>> fronts;
    std::vector<int> current;
    for (int p = 0; p < n; ++p)
        if (count[p] == 0) current.push_back(p);
    while (!current.empty()) {
        fronts.push_back(current);
        std::vector<int> next;
        for (int p : current)
            for (int q : dominated[p])
                if (--count[q] == 0) next.push_back(q);
        std::sort(next.begin(), next.end());
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distance(const std::vector<ObjectiveVector>& front) {
    const int n = static_cast<int>(front.size());
    std::vector<double> dist(n, 0.0);
    if (n == 0) return dist;
    const int M = static_cast<int>(front[0].size());
    const double inf = std::numeric_limits<double>::infinity();
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), inf);
        return dist;
    }
    std::vector<int> idx(n);
    for (int m = 0; m < M; ++m) {
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return front[a][m] < front[b][m]; });
        dist[idx.front()] = inf;
        dist[idx.back()] = inf;
        double span = front[idx.back()][m] - front[idx.front()][m];
        if (span <= 0.0) continue;
        for (int k = 1; k + 1 < n; ++k) {
            if (dist[idx[k]] == inf) continue;
            dist[idx[k]] += (front[idx[k + 1]][m] - front[idx[k - 1]][m]) / span;
        }
    }
    return dist;
}

Tour order_crossover(const Tour& a, const Tour& b, int cut_begin, int cut_end) {
    const int n = a.size();
    if (b.size() != n || cut_begin < 0 || cut_end > n || cut_begin > cut_end)
        throw DomainError("order_crossover: bad cuts or parent sizes");
    Tour child;
    child.order.assign(n, -1);
    std::vector<bool> used(n, false);
    for (int i = cut_begin; i < cut_end; ++i) {
        child.order[i] = a.order[i];
        used[a.order[i]] = true;
    }
    int write = cut_end % n;
    for (int k = 0; k < n; ++k) {
        int city = b.order[(cut_end + k) % n];
        if (used[city]) continue;
        while (child.order[write] != -1) write = (write + 1) % n;
        child.order[write] = city;
        used[city] = true;
    }
    return child;
}

Tour variation(Rng& rng, const Tour& parent_a, const Tour& parent_b, double p_mut) {
    const int n = parent_a.size();
    if (parent_b.size() != n) throw DomainError("variation: parent sizes differ");
    int c1 = rng.uniform_int(n);
    int c2 = c1 + 1 + rng.uniform_int(n - c1);
    Tour child = order_crossover(parent_a, parent_b, c1, c2);
    if (rng.uniform() < p_mut) {
        int i = rng.uniform_int(n);
        int j = rng.uniform_int(n);
        if (i > j) std::swap(i, j);
        std::reverse(child.order.begin() + i, child.order.begin() + j + 1);
    }
    return child;
}

namespace {

struct RankedPop {
    std::vector<int> rank;
    std::vector<double> crowding;
};

RankedPop rank_population(const std::vector<ObjectiveVector>& objs) {
    RankedPop r;
    r.rank.assign(objs.size(), 0);
    r.crowding.assign(objs.size(), 0.0);
    auto fronts = fast_nondominated_sort(objs);
    for (size_t f = 0; f < fronts.size(); ++f) {
        std::vector<ObjectiveVector> front_objs;
        for (int i : fronts[f]) front_objs.push_back(objs[i]);
        std::vector<double> cd = crowding_distance(front_objs);
        for (size_t k = 0; k < fronts[f].size(); ++k) {
            r.rank[fronts[f][k]] = static_cast<int>(f);
            r.crowding[fronts[f][k]] = cd[k];
        }
    }
    return r;
}

int tournament(Rng& rng, const RankedPop& ranked, int pop_size) {
    int a = rng.uniform_int(pop_size);
    int b = rng.uniform_int(pop_size);
    if (ranked.rank[a] != ranked.rank[b]) return ranked.rank[a] < ranked.rank[b] ? a : b;
    if (ranked.crowding[a] != ranked.crowding[b]) return ranked.crowding[a] > ranked.crowding[b] ? a : b;
    return a;
}

ParetoArchive archive_from(const std::vector<Tour>& tours, const std::vector<ObjectiveVector>& objs) {
    std::vector<ArchiveEntry> entries;
    entries.reserve(tours.size());
    for (size_t i = 0; i < tours.size(); ++i) entries.push_back({tours[i], objs[i], -1});
    return nondominated_filter(entries);
}

}  // namespace

ParetoArchive nsga2_run(const Instance& instance, int pop_size, int iterations, Rng& rng, double p_mut) {
    if (pop_size < 4 || pop_size % 2 != 0) throw ConfigError("nsga2_run: pop_size must be even and >= 4");
    const int n = instance.n;
    std::vector<Tour> pop;
    std::vector<ObjectiveVector> objs;
    for (int i = 0; i < pop_size; ++i) {
        pop.push_back(random_tour(rng, n));
        objs.push_back(evaluate_tour(instance, pop.back()));
    }
    for (int it = 0; it < iterations; ++it) {
        RankedPop ranked = rank_population(objs);
        std::vector<Tour> children;
        std::vector<ObjectiveVector> child_objs;
        while (static_cast<int>(children.size()) < pop_size) {
            int pa = tournament(rng, ranked, pop_size);
            int pb = tournament(rng, ranked, pop_size);
            children.push_back(variation(rng, pop[pa], pop[pb], p_mut));
            child_objs.push_back(evaluate_tour(instance, children.back()));
        }
        // elitist environmental selection over parents + offspring
        std::vector<Tour> combined = pop;
        combined.insert(combined.end(), children.begin(), children.end());
        std::vector<ObjectiveVector> combined_objs = objs;
        combined_objs.insert(combined_objs.end(), child_objs.begin(), child_objs.end());
        auto fronts = fast_nondominated_sort(combined_objs);
        std::vector<Tour> next;
        std::vector<ObjectiveVector> next_objs;
        for (const auto& front : fronts) {
            if (static_cast<int>(next.size()) + static_cast<int>(front.size()) <= pop_size) {
                for (int i : front) {
                    next.push_back(combined[i]);
                    next_objs.push_back(combined_objs[i]);
                }
            } else {
                std::vector<ObjectiveVector> front_objs;
                for (int i : front) front_objs.push_back(combined_objs[i]);
                std::vector<double> cd = crowding_distance(front_objs);
                std::vector<int> order(front.size());
                std::iota(order.begin(), order.end(), 0);
                std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return cd[x] > cd[y]; });
                for (int k : order) {
                    if (static_cast<int>(next.size()) == pop_size) break;
                    next.push_back(combined[front[k]]);
                    next_objs.push_back(combined_objs[front[k]]);
                }
            }
            if (static_cast<int>(next.size()) == pop_size) break;
        }
        pop = std::move(next);
        objs = std::move(next_objs);
    }
    return archive_from(pop, objs);
}

std::vector<std::vector<int>> neighborhood_table(const std::vector<WeightVector>& weights, int T_nbr) {
    const int N = static_cast<int>(weights.size());
    T_nbr = std::min(T_nbr, N);
    if (T_nbr < 1) throw ConfigError("neighborhood_table: T_nbr must be >= 1");
    std::vector<std::vector<int>> table(N);
    for (int i = 0; i < N; ++i) {
        std::vector<std::pair<double, int>> dist;
        dist.reserve(N);
        for (int j = 0; j < N; ++j) {
            double d2 = 0.0;
            for (size_t k = 0; k < weights[i].size(); ++k) {
                double d = weights[i][k] - weights[j][k];
                d2 += d * d;
            }
            dist.push_back({d2, j});
        }
        std::sort(dist.begin(), dist.end());
        for (int k = 0; k < T_nbr; ++k) table[i].push_back(dist[k].second);
    }
    return table;
}

ParetoArchive moead_run(const Instance& instance, int N, int iterations, int T_nbr, Rng& rng,
                        double p_mut, MoeadTrace* trace) {
    if (N < 2) throw ConfigError("moead_run: N must be >= 2");
    std::vector<WeightVector> weights = generate_weights(N, instance.M);
    std::vector<std::vector<int>> nbr = neighborhood_table(weights, T_nbr);

    std::vector<Tour> pop;
    std::vector<ObjectiveVector> objs;
    ObjectiveVector ideal(instance.M, std::numeric_limits<double>::infinity());
    for (int i = 0; i < N; ++i) {
        pop.push_back(random_tour(rng, instance.n));
        objs.push_back(evaluate_tour(instance, pop.back()));
        for (int k = 0; k < instance.M; ++k) ideal[k] = std::min(ideal[k], objs.back()[k]);
    }
    for (int gen = 0; gen < iterations; ++gen) {
        for (int i = 0; i < N; ++i) {
            int T = static_cast<int>(nbr[i].size());
            int pa = nbr[i][rng.uniform_int(T)];
            int pb = nbr[i][rng.uniform_int(T)];
            Tour child = variation(rng, pop[pa], pop[pb], p_mut);
            ObjectiveVector child_obj = evaluate_tour(instance, child);
            for (int k = 0; k < instance.M; ++k) ideal[k] = std::min(ideal[k], child_obj[k]);
            for (int j : nbr[i]) {
                if (tchebycheff(weights[j], child_obj, ideal) < tchebycheff(weights[j], objs[j], ideal)) {
                    pop[j] = child;
                    objs[j] = child_obj;
                }
            }
        }
        if (trace) trace->ideal_by_generation.push_back(ideal);
    }
    return archive_from(pop, objs);
}

void MOGLSConfig::validate() const {
    if (n_ls < 0 && n_ls != kTwoOptConverge) throw ConfigError("mogls: N_LS must be >= 0");
    if (temp_pop < 2) throw ConfigError("mogls: temporary population must be >= 2");
    if (initial < 2) throw ConfigError("mogls: initial solutions must be >= 2");
    if (generations < 0) throw ConfigError("mogls: generations must be >= 0");
}

namespace {

WeightVector random_simplex_weight(Rng& rng, int M) {
    WeightVector w(M);
    double sum = 0.0;
    for (int k = 0; k < M; ++k) {
        w[k] = -std::log(1.0 - rng.uniform());
        sum += w[k];
    }
    for (int k = 0; k < M; ++k) w[k] /= sum;
    return w;
}

// Dominance-filtered archive insertion; exact objective duplicates are kept once.
void archive_add(std::vector<ArchiveEntry>& archive, ArchiveEntry entry) {
    for (const ArchiveEntry& e : archive) {
        if (dominates(e.objectives, entry.objectives) || e.objectives == entry.objectives) return;
    }
    std::erase_if(archive, [&](const ArchiveEntry& e) { return dominates(entry.objectives, e.objectives); });
    archive.push_back(std::move(entry));
}

}  // namespace

ParetoArchive mogls_run(const Instance& instance, const MOGLSConfig& config, Rng& rng,
                        const MoglsHooks& hooks) {
    config.validate();
    struct Solution {
        Tour tour;
        ObjectiveVector objectives;
    };
    std::vector<Solution> current;
    ParetoArchive archive;

    for (int s = 0; s < config.initial; ++s) {
        WeightVector lambda = random_simplex_weight(rng, instance.M);
        Tour t = two_opt(instance, random_tour(rng, instance.n), lambda, config.n_ls);
        Solution sol{t, evaluate_tour(instance, t)};
        archive_add(archive.entries, {sol.tour, sol.objectives, -1});
        current.push_back(std::move(sol));
    }

    const size_t cap = static_cast<size_t>(std::max(2 * config.initial, 100));
    for (int gen = 0; gen < config.generations; ++gen) {
        WeightVector lambda = random_simplex_weight(rng, instance.M);
        std::vector<int> order(current.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return weighted_sum(lambda, current[a].objectives) < weighted_sum(lambda, current[b].objectives);
        });
        int K = std::min<int>(config.temp_pop, static_cast<int>(order.size()));
        int ia = rng.uniform_int(K);
        int ib = rng.uniform_int(K);
        if (K > 1 && ib == ia) ib = (ia + 1 + rng.uniform_int(K - 1)) % K;
        int pa = order[ia], pb = order[ib];

        int c1 = rng.uniform_int(instance.n);
        int c2 = c1 + 1 + rng.uniform_int(instance.n - c1);
        Tour child = order_crossover(current[pa].tour, current[pb].tour, c1, c2);
        child = two_opt(instance, child, lambda, config.n_ls);
        ObjectiveVector child_obj = evaluate_tour(instance, child);
        archive_add(archive.entries, {child, child_obj, -1});

        double worst_tp = weighted_sum(lambda, current[order[K - 1]].objectives);
        if (weighted_sum(lambda, child_obj) < worst_tp) {
            if (current.size() >= cap) {
                // replace the worst solution under the current scalarization
                int worst = order.back();
                current[worst] = {std::move(child), std::move(child_obj)};
            } else {
                current.push_back({std::move(child), std::move(child_obj)});
            }
        }
        if (hooks.on_generation) hooks.on_generation(gen, archive);
    }
    return archive;
}

ParetoArchive ls_postprocess(const Instance& instance, const ParetoArchive& archive,
                             const std::vector<WeightVector>& bank_weights, long budget) {
    std::vector<ArchiveEntry> pool = archive.entries;
    for (const ArchiveEntry& e : archive.entries) {
        if (e.origin < 0 || e.origin >= static_cast<int>(bank_weights.size()))
            throw DomainError("ls_postprocess: entry lacks a valid originating weight index");
        Tour improved = two_opt(instance, e.tour, bank_weights[e.origin], budget);
        pool.push_back({std::move(improved), {}, e.origin});
        pool.back().objectives = evaluate_tour(instance, pool.back().tour);
    }
    return nondominated_filter(pool);
}

}  // namespace motsp

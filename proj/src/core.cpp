#include "motsp/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace motsp {

int objective_width(ObjectiveKind kind) {
    return kind == ObjectiveKind::euclidean2d ? 2 : 1;
}

std::string objective_kind_name(ObjectiveKind kind) {
    return kind == ObjectiveKind::euclidean2d ? "euclidean2d" : "scalar-diff";
}

ObjectiveKind objective_kind_from_name(const std::string& name) {
    if (name == "euclidean2d") return ObjectiveKind::euclidean2d;
    if (name == "scalar-diff") return ObjectiveKind::scalar_diff;
    throw ParseError("unknown objective kind '" + name + "'");
}

void Instance::validate() const {
    if (n < 2) throw DomainError("instance: n must be >= 2");
    if (M < 2) throw DomainError("instance: M must be >= 2");
    if (static_cast<int>(specs.size()) != M) throw DomainError("instance: specs count != M");
    if (!(scale > 0.0)) throw DomainError("instance: scale must be positive");
    // Objective slices must be disjoint and exactly tile the feature row.
    std::vector<int> owner(d_input, -1);
    for (int k = 0; k < M; ++k) {
        const ObjectiveSpec& s = specs[k];
        if (s.feature_width != objective_width(s.kind))
            throw DomainError("instance: spec " + std::to_string(k) + " width inconsistent with kind");
        for (int c = s.feature_offset; c < s.feature_offset + s.feature_width; ++c) {
            if (c < 0 || c >= d_input || owner[c] != -1)
                throw DomainError("instance: objective slices must tile the feature row");
            owner[c] = k;
        }
    }
    for (int c = 0; c < d_input; ++c)
        if (owner[c] == -1) throw DomainError("instance: feature column " + std::to_string(c) + " unused");
    if (features.size() != static_cast<size_t>(n) * d_input)
        throw DomainError("instance: feature matrix size mismatch");
    for (double v : features)
        if (!std::isfinite(v)) throw DomainError("instance: non-finite feature");
}

Instance make_instance(std::vector<ObjectiveSpec> specs, const std::vector<std::vector<double>>& rows) {
    Instance inst;
    inst.specs = std::move(specs);
    inst.M = static_cast<int>(inst.specs.size());
    inst.n = static_cast<int>(rows.size());
    int d = 0;
    for (const ObjectiveSpec& s : inst.specs) d += s.feature_width;
    inst.d_input = d;
    inst.features.reserve(static_cast<size_t>(inst.n) * d);
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != d) throw DomainError("make_instance: row width != D_input");
        inst.features.insert(inst.features.end(), row.begin(), row.end());
    }
    inst.validate();
    return inst;
}

std::vector<ObjectiveSpec> family_specs(const std::string& family) {
    auto euc = [](int off) { return ObjectiveSpec{ObjectiveKind::euclidean2d, off, 2}; };
    auto alt = [](int off) { return ObjectiveSpec{ObjectiveKind::scalar_diff, off, 1}; };
    if (family == "euclidean") return {euc(0), euc(2)};
    if (family == "mixed") return {euc(0), alt(2)};
    if (family == "3obj") return {euc(0), euc(2), alt(4)};
    if (family == "5obj") return {euc(0), euc(2), alt(4), alt(5), alt(6)};
    throw ConfigError("unknown instance family '" + family + "' (expected euclidean, mixed, 3obj or 5obj)");
}

bool is_permutation_tour(const Tour& tour, int n) {
    if (static_cast<int>(tour.order.size()) != n) return false;
    std::vector<bool> seen(n, false);
    for (int c : tour.order) {
        if (c < 0 || c >= n || seen[c]) return false;
        seen[c] = true;
    }
    return true;
}

double edge_cost(const Instance& instance, int k, int i, int j) {
    if (k < 0 || k >= instance.M) throw DomainError("edge_cost: objective index out of range");
    if (i < 0 || i >= instance.n || j < 0 || j >= instance.n)
        throw DomainError("edge_cost: city index out of range");
    const ObjectiveSpec& s = instance.specs[k];
    const double* a = instance.row(i) + s.feature_offset;
    const double* b = instance.row(j) + s.feature_offset;
    if (s.kind == ObjectiveKind::euclidean2d) {
        double dx = a[0] - b[0];
        double dy = a[1] - b[1];
        return std::sqrt(dx * dx + dy * dy);
    }
    return std::abs(a[0] - b[0]);
}

ObjectiveVector evaluate_tour(const Instance& instance, const Tour& tour) {
    if (!is_permutation_tour(tour, instance.n))
        throw DomainError("evaluate_tour: tour is not a permutation of the instance cities");
    ObjectiveVector z(instance.M, 0.0);
    const int n = instance.n;
    for (int i = 0; i < n; ++i) {
        int from = tour.order[i];
        int to = tour.order[(i + 1) % n];
        for (int k = 0; k < instance.M; ++k) z[k] += edge_cost(instance, k, from, to);
    }
    return z;
}

double weighted_sum(const WeightVector& lambda, const ObjectiveVector& f) {
    if (lambda.size() != f.size()) throw DomainError("weighted_sum: dimension mismatch");
    double g = 0.0;
    for (size_t i = 0; i < f.size(); ++i) g += lambda[i] * f[i];
    return g;
}

double tchebycheff(const WeightVector& lambda, const ObjectiveVector& f, const ObjectiveVector& ideal) {
    if (lambda.size() != f.size() || ideal.size() != f.size())
        throw DomainError("tchebycheff: dimension mismatch");
    double g = 0.0;
    for (size_t i = 0; i < f.size(); ++i) g = std::max(g, lambda[i] * std::abs(f[i] - ideal[i]));
    return g;
}

namespace {

long long simplex_lattice_size(int H, int M) {
    // C(H + M - 1, M - 1)
    long long r = 1;
    for (int i = 1; i <= M - 1; ++i) r = r * (H + i) / i;
    return r;
}

void enumerate_lattice(int remaining, int H, int dims_left, std::vector<double>& prefix,
                       std::vector<WeightVector>& out) {
    if (dims_left == 1) {
        std::vector<double> w = prefix;
        w.push_back(static_cast<double>(remaining) / H);
        out.push_back(std::move(w));
        return;
    }
    for (int k = remaining; k >= 0; --k) {
        prefix.push_back(static_cast<double>(k) / H);
        enumerate_lattice(remaining - k, H, dims_left - 1, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

std::vector<WeightVector> generate_weights(int N, int M) {
    if (M < 2) throw ConfigError("generate_weights: M must be >= 2");
    if (N < 2) throw ConfigError("generate_weights: N must be >= 2");
    int H = -1;
    if (M == 2) {
        H = N - 1;
    } else {
        long long below = -1;
        for (int h = 1; h < 100000; ++h) {
            long long size = simplex_lattice_size(h, M);
            if (size == N) {
                H = h;
                break;
            }
            if (size > N) {
                std::string nearest = below > 0 ? std::to_string(below) + " and " + std::to_string(size)
                                                : std::to_string(size);
                throw ConfigError("generate_weights: N=" + std::to_string(N) + " is not a simplex-lattice size for M=" +
                                  std::to_string(M) + "; nearest feasible: " + nearest);
            }
            below = size;
        }
    }
    std::vector<WeightVector> weights;
    std::vector<double> prefix;
    enumerate_lattice(H, H, M, prefix, weights);
    return weights;
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    if (a.size() != b.size()) throw DomainError("dominates: dimension mismatch");
    bool strictly_better = false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strictly_better = true;
    }
    return strictly_better;
}

std::vector<ObjectiveVector> ParetoArchive::objective_vectors() const {
    std::vector<ObjectiveVector> v;
    v.reserve(entries.size());
    for (const ArchiveEntry& e : entries) v.push_back(e.objectives);
    return v;
}

ParetoArchive nondominated_filter(const std::vector<ArchiveEntry>& points) {
    ParetoArchive archive;
    const int n = static_cast<int>(points.size());
    for (int i = 0; i < n; ++i) {
        bool keep = true;
        for (int j = 0; j < n && keep; ++j) {
            if (j == i) continue;
            if (dominates(points[j].objectives, points[i].objectives)) keep = false;
            if (j < i && points[j].objectives == points[i].objectives) keep = false;
        }
        if (keep) archive.entries.push_back(points[i]);
    }
    return archive;
}

bool is_mutually_nondominated(const std::vector<ObjectiveVector>& points) {
    for (size_t i = 0; i < points.size(); ++i)
        for (size_t j = 0; j < points.size(); ++j)
            if (i != j && dominates(points[i], points[j])) return false;
    return true;
}

Instance normalize_instance(const Instance& instance) {
    instance.validate();
    bool inside_unit = std::all_of(instance.features.begin(), instance.features.end(),
                                   [](double v) { return v >= 0.0 && v <= 1.0; });
    if (inside_unit) {
        Instance out = instance;
        out.scale = 1.0;
        return out;
    }
    const int d = instance.d_input;
    std::vector<double> lo(d, std::numeric_limits<double>::infinity());
    std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
    for (int i = 0; i < instance.n; ++i) {
        for (int c = 0; c < d; ++c) {
            double v = instance.feature(i, c);
            lo[c] = std::min(lo[c], v);
            hi[c] = std::max(hi[c], v);
        }
    }
    double scale = 0.0;
    for (int c = 0; c < d; ++c) scale = std::max(scale, hi[c] - lo[c]);
    Instance out = instance;
    if (scale == 0.0) {  // zero-extent instance: identity mapping
        out.scale = 1.0;
        return out;
    }
    for (int i = 0; i < instance.n; ++i)
        for (int c = 0; c < d; ++c)
            out.features[static_cast<size_t>(i) * d + c] = (instance.feature(i, c) - lo[c]) / scale;
    out.scale = scale;
    return out;
}

}  // namespace motsp

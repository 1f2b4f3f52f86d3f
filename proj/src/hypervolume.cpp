#include "motsp/hypervolume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "motsp/rng.hpp"

namespace motsp {

namespace {

// Keep only points strictly inside the reference box, then strip dominated
// ones (duplicates collapse to one).
std::vector<ObjectiveVector> clip_and_filter(const std::vector<ObjectiveVector>& front,
                                             const ObjectiveVector& ref) {
    std::vector<ObjectiveVector> pts;
    for (const ObjectiveVector& p : front) {
        if (p.size() != ref.size()) throw DomainError("hypervolume: point/reference dimension mismatch");
        bool inside = true;
        for (size_t i = 0; i < p.size(); ++i)
            if (p[i] >= ref[i]) inside = false;
        if (inside) pts.push_back(p);
    }
    std::vector<ObjectiveVector> kept;
    for (size_t i = 0; i < pts.size(); ++i) {
        bool keep = true;
        for (size_t j = 0; j < pts.size() && keep; ++j) {
            if (j == i) continue;
            if (dominates(pts[j], pts[i])) keep = false;
            if (j < i && pts[j] == pts[i]) keep = false;
        }
        if (keep) kept.push_back(pts[i]);
    }
    return kept;
}

double sweep_2d(std::vector<ObjectiveVector> pts, double ref0, double ref1) {
    if (pts.empty()) return 0.0;
    std::sort(pts.begin(), pts.end());  // ascending f1; nondominated => descending f2
    double hv = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
        double right = (i + 1 < pts.size()) ? pts[i + 1][0] : ref0;
        hv += (right - pts[i][0]) * (ref1 - pts[i][1]);
    }
    return hv;
}

// Recursive slicing along the last objective (HSO). `pts` are mutually
// non-dominated in d dimensions and strictly inside the reference box.
double slice_recursive(const std::vector<ObjectiveVector>& pts, const ObjectiveVector& ref, int d) {
    if (pts.empty()) return 0.0;
    if (d == 2) return sweep_2d(pts, ref[0], ref[1]);
    // Sort by the last coordinate; the slab between consecutive z values is a
    // (d-1)-dimensional hypervolume times the slab thickness.
    std::vector<const ObjectiveVector*> order;
    order.reserve(pts.size());
    for (const auto& p : pts) order.push_back(&p);
    std::sort(order.begin(), order.end(),
              [d](const ObjectiveVector* a, const ObjectiveVector* b) { return (*a)[d - 1] < (*b)[d - 1]; });

    double hv = 0.0;
    std::vector<ObjectiveVector> active;  // projections of points with z <= current slab
    ObjectiveVector subref(ref.begin(), ref.begin() + (d - 1));
    size_t i = 0;
    while (i < order.size()) {
        double z = (*order[i])[d - 1];
        while (i < order.size() && (*order[i])[d - 1] == z) {
            active.emplace_back(order[i]->begin(), order[i]->begin() + (d - 1));
            ++i;
        }
        double z_next = (i < order.size()) ? (*order[i])[d - 1] : ref[d - 1];
        if (z_next > z) {
            std::vector<ObjectiveVector> filtered;
            for (size_t a = 0; a < active.size(); ++a) {
                bool keep = true;
                for (size_t b = 0; b < active.size() && keep; ++b) {
                    if (b == a) continue;
                    if (dominates(active[b], active[a])) keep = false;
                    if (b < a && active[b] == active[a]) keep = false;
                }
                if (keep) filtered.push_back(active[a]);
            }
            hv += (z_next - z) * slice_recursive(filtered, subref, d - 1);
        }
    }
    return hv;
}

}  // namespace

double hypervolume_2d(const std::vector<ObjectiveVector>& front, const ObjectiveVector& ref) {
    if (ref.size() != 2) throw DomainError("hypervolume_2d: reference must be 2-D");
    return sweep_2d(clip_and_filter(front, ref), ref[0], ref[1]);
}

double hypervolume_monte_carlo(const std::vector<ObjectiveVector>& front, const ObjectiveVector& ref,
                               long samples, std::uint64_t seed) {
    std::vector<ObjectiveVector> pts = clip_and_filter(front, ref);
    if (pts.empty()) return 0.0;
    const int M = static_cast<int>(ref.size());
    ObjectiveVector lo(M, 0.0);
    for (int k = 0; k < M; ++k) {
        lo[k] = pts[0][k];
        for (const auto& p : pts) lo[k] = std::min(lo[k], p[k]);
    }
    double box = 1.0;
    for (int k = 0; k < M; ++k) box *= ref[k] - lo[k];
    Rng rng(seed);
    long hits = 0;
    ObjectiveVector x(M);
    for (long s = 0; s < samples; ++s) {
        for (int k = 0; k < M; ++k) x[k] = rng.uniform(lo[k], ref[k]);
        for (const auto& p : pts) {
            bool dom = true;
            for (int k = 0; k < M; ++k)
                if (p[k] > x[k]) {
                    dom = false;
                    break;
                }
            if (dom) {
                ++hits;
                break;
            }
        }
    }
    return box * static_cast<double>(hits) / static_cast<double>(samples);
}

HvResult hypervolume(const std::vector<ObjectiveVector>& front, const ObjectiveVector& ref,
                     int exact_limit) {
    const int M = static_cast<int>(ref.size());
    if (M < 2) throw DomainError("hypervolume: reference must have >= 2 objectives");
    if (M == 2) return {hypervolume_2d(front, ref), "exact-sweep"};
    std::vector<ObjectiveVector> pts = clip_and_filter(front, ref);
    if (static_cast<int>(pts.size()) <= exact_limit)
        return {slice_recursive(pts, ref, M), "exact-slicing"};
    return {hypervolume_monte_carlo(front, ref, 1000000, 0x9d2c5680u), "monte-carlo"};
}

ObjectiveVector hv_reference(const std::vector<std::vector<ObjectiveVector>>& fronts) {
    ObjectiveVector ref;
    for (const auto& front : fronts) {
        for (const ObjectiveVector& p : front) {
            if (ref.empty()) ref.assign(p.size(), -std::numeric_limits<double>::infinity());
            if (p.size() != ref.size()) throw DomainError("hv_reference: mixed objective dimensions");
            for (size_t k = 0; k < p.size(); ++k) ref[k] = std::max(ref[k], p[k]);
        }
    }
    if (ref.empty()) throw DomainError("hv_reference: no points given");
    for (double& v : ref) v *= 1.1;
    return ref;
}

}  // namespace motsp

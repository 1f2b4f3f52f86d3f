#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace motsp {

/// Seeded pseudo-random generator. All randomness in the project flows through
/// this class; the double/int conversions are done by hand so that streams are
/// identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

    /// Draw an index from a probability vector (entries >= 0, summing to ~1)
    /// by CDF inversion. Falls back to the last positive entry on rounding.
    int categorical(std::span<const double> probs);

    /// Fisher-Yates shuffle of an index range.
    template <typename T>
    void shuffle(std::span<T> items) {
        for (int i = static_cast<int>(items.size()) - 1; i > 0; --i) {
            int j = uniform_int(i + 1);
            std::swap(items[i], items[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

/// Derive an independent child seed from (seed, salt); splitmix64 finalizer.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace motsp

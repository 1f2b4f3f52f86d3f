#include "motsp/rng.hpp"

#include "motsp/errors.hpp"

namespace motsp {

int Rng::categorical(std::span<const double> probs) {
    double u = uniform();
    double cum = 0.0;
    int last_positive = -1;
    for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
        if (probs[i] <= 0.0) continue;
        last_positive = i;
        cum += probs[i];
        if (u < cum) return i;
    }
    // u landed in the rounding gap between cum and 1.
    if (last_positive < 0) throw DomainError("categorical: all probabilities are zero");
    return last_positive;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace motsp

#ifndef SVQ_RNG_HPP
#define SVQ_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "svq/errors.hpp"

namespace svq {

// Deterministic random stream. All distributions are hand-rolled on top of
// mt19937_64 so that runs are bit-identical across platforms (the standard
// <random> distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1), 53-bit resolution
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // uniform integer in [0, m)
    int uniform_int(int m) {
        return static_cast<int>(uniform() * static_cast<double>(m)) % m;
    }

    // standard normal via Box-Muller; caches the second deviate
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Independent stream for a sub-component, a pure function of
    // (seed, offset). SplitMix64 scrambling separates adjacent offsets.
    Rng derive(std::uint64_t offset) const {
        std::uint64_t z = seed_ + 0x9E3779B97F4A7C15ull * (offset + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return Rng(z ^ (z >> 31));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Inverse-CDF categorical draw; ties break toward the lowest index.
inline int sample_categorical(const std::vector<double>& probs, Rng& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    for (std::size_t y = 0; y < probs.size(); ++y) {
        cum += probs[y];
        if (u < cum) return static_cast<int>(y);
    }
    // u landed in rounding slack past the last cumulative value
    for (std::size_t y = probs.size(); y-- > 0;) {
        if (probs[y] > 0.0) return static_cast<int>(y);
    }
    throw ConfigError("sample_categorical: all probabilities are zero");
}

} // namespace svq

#endif

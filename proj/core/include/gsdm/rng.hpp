#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

#include "gsdm/linalg.hpp"

namespace gsdm {

// splitmix64 step; used to mix seeds with stream tags so that every
// consumer of randomness owns an independent, reproducible stream.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = mix64(seed ^ 0x6a09e667f3bcc908ull);
    for (std::uint64_t t : tags) s = mix64(s ^ t);
    return s;
}

// Deterministic generator. Gaussian draws go through Box-Muller on raw
// uniforms rather than std::normal_distribution, whose output sequence is
// implementation-defined.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}
    Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags)
        : eng_(derive_seed(seed, tags)) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform on (0, 1]; never returns exactly 0 so log() is safe
    double uniform() {
        return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n) {
        // rejection sampling to avoid modulo bias
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % n;
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    void fill_gaussian(Vec& v) {
        for (double& x : v) x = gaussian();
    }
    void fill_gaussian(Mat& m) { fill_gaussian(m.raw()); }

    std::mt19937_64& engine() { return eng_; }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace gsdm

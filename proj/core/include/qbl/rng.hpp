#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qbl {

/// Deterministic random source. The engine is std::mt19937_64, whose output
/// sequence is fixed by the C++ standard, and all derived values (uniforms,
/// normals) are computed here from raw engine words rather than through
/// std::<distribution> types, which are not portable across standard
/// libraries. Identical seed => identical stream on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). Rejection-free modulo is fine here: n is
    /// always far below 2^64 so the bias is immaterial, but we keep the
    /// unbiased version anyway since it is three lines.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do { x = next_u64(); } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller (no rejection, portable).
    double normal() {
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Independent child stream addressed by `stream`. Mixing is splitmix64
    /// applied to seed ^ golden-ratio-scrambled stream id.
    Rng derive(std::uint64_t stream) const {
        std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z = z ^ (z >> 31);
        return Rng(z);
    }

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace qbl

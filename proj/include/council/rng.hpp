#pragma once

#include <cstdint>

namespace council {

// SplitMix64 (Steele, Lea & Flood 2014). The project's one stochastic
// primitive: portable, 64-bit state, identical streams on every platform.
// All seeded outputs (bootstrap CIs, sampling) derive from it so results
// are reproducible bit-for-bit across machines and thread counts.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform index in [0, n) via 128-bit multiply-shift (Lemire reduction,
    // no rejection). Bias is < n / 2^64, negligible at our scales, and the
    // mapping is fully deterministic.
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // Uniform double in [0, 1).
    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

  private:
    std::uint64_t state_;
};

// Seed-splitting function used everywhere a child seed is derived from a
// parent: run seeds from the master seed, resample seeds from a bootstrap
// seed, per-call sampling seeds from a run seed. Documented contract:
//   derive_seed(parent, i) = SplitMix64(parent ^ (0x9e3779b97f4a7c15 * (i+1))).next()
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
    return SplitMix64(parent ^ (0x9e3779b97f4a7c15ULL * (index + 1))).next();
}

} // namespace council

#pragma once

#include <cmath>
#include <cstdint>

namespace gcdec {

// Small counter-seeded PRNG used throughout the simulators.
//
// Frames are seeded as rng_for_frame(master_seed, frame_index), which makes
// every frame reproducible in isolation and independent of execution order
// (thread scheduling, early stops, resumed runs).  We roll our own instead of
// using <random> distributions because the standard does not pin their output
// sequences across library implementations, and the harness promises
// byte-identical reruns.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // splitmix64 step; passes PractRand/BigCrush at this output size.
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in {0, 1, ..., bound-1} via rejection (bound > 0).
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = bound * (~std::uint64_t{0} / bound);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % bound;
    }

    bool next_bit() { return (next_u64() >> 63) != 0; }

    // Standard normal via Box-Muller (one cached value).
    double next_gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = next_unit();
        double u2 = next_unit();
        while (u1 <= 0.0) u1 = next_unit();  // avoid log(0)
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        cached_ = radius * std::sin(angle);
        have_cached_ = true;
        return radius * std::cos(angle);
    }

  private:
    std::uint64_t state_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

// Derives an independent stream for (seed, index) pairs.  Mixing through two
// splitmix steps decorrelates adjacent frame indices.
inline Rng rng_for_frame(std::uint64_t master_seed, std::uint64_t frame_index) {
    Rng mixer(master_seed ^ (frame_index * 0xd1342543de82ef95ull + 0x632be59bd9b4e019ull));
    const std::uint64_t s = mixer.next_u64();
    return Rng(s ^ mixer.next_u64());
}

}  // namespace gcdec

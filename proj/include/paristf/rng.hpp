#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace paristf {

// splitmix64 finalizer, used for seeding and key mixing.
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256** with explicit seeding; small state, cheap construction, so a
// fresh generator per (seed, t, particle) substream costs next to nothing.
class Xoshiro256 {
public:
    using result_type = uint64_t;

    explicit Xoshiro256(uint64_t seed = 0) {
        uint64_t z = seed;
        for (auto& w : s_) {
            z = mix64(z);
            w = z;
        }
    }

    static constexpr uint64_t min() { return 0; }
    static constexpr uint64_t max() { return ~0ULL; }

    uint64_t operator()() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform on [0, 1)
    double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1]; safe as a log() argument
    double uniform01_pos() { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<uint64_t, 4> s_{};
};

// One standard normal draw via Box-Muller (no cached second value, so the
// draw sequence depends only on the generator state).
inline double draw_normal(Xoshiro256& rng) {
    const double u1 = rng.uniform01_pos();
    const double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Purpose tags keep substreams of the same (t, i) pair disjoint.
enum class StreamTag : uint64_t {
    init = 1,
    select = 2,
    mutate = 3,
    backward = 4,
    start = 5,  // randomized starting parameters
    data = 6,   // observation record simulation
};

// Root seed of one run. Every random decision derives its own generator from
// (seed, t, i, tag), which makes results independent of the worker count and
// makes any (t, i) slice resumable.
struct RunRng {
    uint64_t seed = 0;

    Xoshiro256 at(uint64_t t, uint64_t i, StreamTag tag) const {
        uint64_t h = mix64(seed ^ 0x5851f42d4c957f2dULL);
        h = mix64(h ^ static_cast<uint64_t>(tag));
        h = mix64(h ^ t);
        h = mix64(h ^ i);
        return Xoshiro256(h);
    }
};

}  // namespace paristf

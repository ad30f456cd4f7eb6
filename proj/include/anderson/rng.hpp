#pragma once

#include <cmath>
#include <cstdint>

namespace anderson {

// All randomness in this project flows through the two primitives below, so
// every stream is pinned by the code itself (no dependence on the standard
// library's distribution implementations).

// SplitMix64 finalizer: full-avalanche 64-bit mixer.
inline uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Per-task seed derivation: absorb a stream id and a task index into the
// master seed, one mix per word. Collisions across (stream, index) pairs are
// as unlikely as 64-bit hash collisions.
inline uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t index) {
    uint64_t s = mix64(master ^ 0x6A09E667F3BCC909ULL);
    s = mix64(s ^ mix64(stream));
    s = mix64(s ^ mix64(index));
    return s;
}

// Stream ids used with derive_seed. Kept in one place so no two call sites
// reuse a stream by accident.
enum Stream : uint64_t {
    STREAM_PAIRING = 1,
    STREAM_DISORDER = 2,
    STREAM_CAVITY_INIT = 3,
    STREAM_CAVITY_SWEEP_BASE = 1000,  // + sweep index
    STREAM_CAVITY_ROOT = 4,
    STREAM_CAVITY_TAIL = 5,
    STREAM_SWITCHING = 6,
    STREAM_TASK = 7,
    STREAM_AUDIT = 8,
    STREAM_TREE_DISORDER = 9,
    STREAM_OUTSIDE_DISORDER = 10,
};

// xoshiro256++ with SplitMix64 state expansion.
class Rng {
  public:
    explicit Rng(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& word : state_) {
            sm += 0x9E3779B97F4A7C15ULL;
            uint64_t z = sm;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            word = z ^ (z >> 31);
        }
    }

    uint64_t next() {
        uint64_t* s = state_;
        const uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        const uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    // uniform in [0, 1) with 53 significant bits
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // exactly uniform integer in [0, n), by rejection
    uint64_t below(uint64_t n) {
        uint64_t x, r;
        do {
            x = next();
            r = x % n;
        } while (x - r > UINT64_MAX - n + 1);
        return r;
    }

    // standard normal via Box-Muller (no cached spare: one draw costs two
    // uniforms, which keeps the stream layout trivial to reason about)
    double normal() {
        double u1;
        do {
            u1 = uniform();
        } while (u1 == 0.0);
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t state_[4];
};

}  // namespace anderson

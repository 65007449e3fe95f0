#ifndef TABSYNTH_RNG_HPP
#define TABSYNTH_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>

namespace tabsynth {

// xoshiro256++ seeded through splitmix64. All draws go through integer
// arithmetic plus exact float scaling, so a given seed yields the same
// stream on every platform.
class DeterministicRng {
public:
    explicit DeterministicRng(std::uint64_t seed = 0) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo,hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // unbiased integer in [0,n)
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // standard normal via the Marsaglia polar method (no trig calls)
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // child generator whose stream is independent of draws taken from this one
    DeterministicRng fork(std::uint64_t salt) {
        return DeterministicRng(next_u64() ^ (salt * 0x9e3779b97f4a7c15ULL));
    }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Stable seed derivation for independent pipeline stages: FNV-1a over the
// labels, mixed with the master seed. Parallel tasks get the same seed no
// matter the scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
    std::uint64_t h = 1469598103934665603ULL ^ master;
    for (unsigned char c : label) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view a, std::string_view b) {
    return derive_seed(derive_seed(master, a), b);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view a, std::string_view b,
                                 std::string_view c) {
    return derive_seed(derive_seed(master, a, b), c);
}

}  // namespace tabsynth

#endif

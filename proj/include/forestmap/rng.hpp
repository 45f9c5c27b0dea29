#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace forestmap {

// All randomness in the library flows through this generator family so that
// results are bit-stable across platforms and standard-library versions:
//
//   * splitmix64 expands seeds and derives child streams,
//   * xoshiro256++ (Blackman & Vigna) is the working generator,
//   * bounded integers use rejection sampling, doubles use the top 53 bits.
//
// Child streams are derived as  state = splitmix64(state ^ splitmix64(tag))
// applied per tag, so (root, stage, index, ...) gives independent streams.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t state = root;
    for (std::uint64_t tag : tags) {
        std::uint64_t mixer = tag;
        state = splitmix64(state) ^ splitmix64(mixer);
    }
    return state;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
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

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform in [0, n), unbiased via rejection. n must be > 0.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Box-Muller; consumes two uniforms per call.
    double normal(double mean, double sd) {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sd * r * std::cos(6.283185307179586476925287 * u2);
    }

    // Fisher-Yates, back to front.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

} // namespace forestmap

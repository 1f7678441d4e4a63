#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace owsol {

// Counter-based deterministic RNG (splitmix64 core). Bit-identical across
// platforms, cheap to copy, and keyable by (seed, stream, index) so sample
// generation stays order-independent under parallel rendering.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}

    static Rng keyed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
        std::uint64_t s = mix(seed + 0x9e3779b97f4a7c15ull);
        s = mix(s ^ mix(stream + 0xbf58476d1ce4e5b9ull));
        s = mix(s ^ mix(index + 0x94d049bb133111ebull));
        return Rng(FromState{}, s);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // Uniform in [0, bound). Multiply-shift; bias is O(bound / 2^64).
    std::uint64_t next_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    // Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller, one normal per call (no cached spare, keeps copies exact).
    double gaussian() {
        double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // n distinct values from [0, pool). Result sorted ascending so later
    // reductions accumulate in a stable order.
    std::vector<int> sample_without_replacement(int pool, int n) {
        std::vector<int> idx(static_cast<std::size_t>(pool));
        for (int i = 0; i < pool; ++i) idx[static_cast<std::size_t>(i)] = i;
        for (int i = 0; i < n; ++i) {
            int j = i + static_cast<int>(next_below(static_cast<std::uint64_t>(pool - i)));
            std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        }
        idx.resize(static_cast<std::size_t>(n));
        std::sort(idx.begin(), idx.end());
        return idx;
    }

private:
    struct FromState {};
    Rng(FromState, std::uint64_t s) : state_(s) {}

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
};

} // namespace owsol

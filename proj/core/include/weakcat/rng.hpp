#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace weakcat {

// Seedable generator with portable draw sequences. mt19937_64 raw output is
// pinned by the standard; all derived draws below avoid std::*_distribution,
// whose outputs vary across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // uniform on [0, n), rejection-sampled so there is no modulo bias
    std::size_t uniform_index(std::size_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do { x = gen_(); } while (x >= limit);
        return static_cast<std::size_t>(x % n);
    }

    // uniform on [0, 1) with 53 random bits
    double uniform_real() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform_range(double lo, double hi) {
        return lo + (hi - lo) * uniform_real();
    }

    // Box-Muller, no caching so the draw count stays predictable
    double normal() {
        double u1 = uniform_real();
        double u2 = uniform_real();
        while (u1 == 0.0) u1 = uniform_real();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // derive an independent stream seed (splitmix64 finalizer)
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 gen_;
};

} // namespace weakcat

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace levymp {

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Hash of (seed, a, b, c) used as the starting state of a stream.
inline constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a = 0,
                                          std::uint64_t b = 0, std::uint64_t c = 0) noexcept {
    std::uint64_t k = mix64(seed ^ 0x6a09e667f3bcc909ULL);
    k = mix64(k ^ (a + 0xbb67ae8584caa73bULL));
    k = mix64(k ^ (b + 0x3c6ef372fe94f82bULL));
    k = mix64(k ^ (c + 0xa54ff53a5f1d36f1ULL));
    return k;
}

// Counter-based generator: output n is mix64(key + n * golden).  A stream is
// fully determined by its key, so work can be split into keyed blocks and
// scheduled on any number of threads without changing the numbers drawn.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}
    CounterRng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) noexcept
        : key_(stream_key(seed, a, b, c)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
    }

    // uniform on the open interval (0, 1)
    double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential() noexcept { return -std::log(uniform()); }

    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double r = std::sqrt(-2.0 * std::log(uniform()));
        double t = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    // Marsaglia-Tsang, with the usual boost for shape < 1
    double gamma(double shape) noexcept {
        if (shape < 1.0) {
            double g = gamma(shape + 1.0);
            return g * std::pow(uniform(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace levymp

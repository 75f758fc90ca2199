#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace vin {

// Counter-based deterministic generator keyed by (seed, stream).
// Every consumer owns its own stream so parallel generation stays
// reproducible regardless of scheduling.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix64(seed ^ mix64(stream ^ 0x6a09e667f3bcc909ull))) {}

    std::uint64_t next_u64() { return mix64(key_ ^ mix64(counter_++)); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

    double normal(double mean = 0.0, double sigma = 1.0) {
        // Box-Muller, two fresh uniforms per draw
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Marsaglia-Tsang; shape boost for k < 1
    double gamma(double shape) {
        if (shape < 1.0) {
            double u = uniform();
            if (u <= 0.0) u = 0x1.0p-53;
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
                return d * v;
        }
    }

    double beta(double a, double b) {
        double ga = gamma(a);
        double gb = gamma(b);
        return ga / (ga + gb);
    }

private:
    static std::uint64_t mix64(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace vin

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace sdtc {

/// Deterministic random stream. The engine is a standard-specified mt19937_64;
/// uniform and exponential draws map engine words to doubles explicitly so the
/// sequence is identical across library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    /// Exponential with the given mean (inverse-CDF of a uniform draw).
    double exponential(double mean) {
        double u = uniform();
        if (u >= 1.0) u = 0.9999999999999999;
        return -mean * std::log1p(-u);
    }

    bool bernoulli(double p) { return uniform() < p; }

    std::uint64_t word() { return engine_(); }

    /// Stable stream splitting: a distinct seed per (seed, label) pair (FNV-1a).
    static std::uint64_t derive(std::uint64_t seed, std::string_view label) {
        std::uint64_t h = 1469598103934665603ull ^ (seed * 1099511628211ull);
        for (const char ch : label) {
            h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(ch));
            h *= 1099511628211ull;
        }
        return h;
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace sdtc

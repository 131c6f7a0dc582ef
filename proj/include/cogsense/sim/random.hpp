#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cogsense::sim {

/// Deterministic random source. Every variate is derived from the
/// standard-specified mt19937_64 stream with explicit transforms, so the
/// same seed reproduces the same bytes on any platform or library version
/// (std::normal_distribution and friends are implementation-defined, which
/// would break golden-file reproducibility).
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(uniform() * (static_cast<double>(hi) - lo + 1.0));
    }

    /// Standard normal via Box-Muller (fresh pair per call).
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Poisson via Knuth's product method (fine for the small rates used here).
    int poisson(double mean) {
        if (mean <= 0.0) {
            return 0;
        }
        const double limit = std::exp(-mean);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

   private:
    std::mt19937_64 engine_;
};

}  // namespace cogsense::sim

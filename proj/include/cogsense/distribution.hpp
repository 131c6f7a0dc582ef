#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cogsense/probes.hpp"

namespace cogsense {

enum class ModelKind { gaussian, histogram };

struct GaussianModel {
    double mean = 0.0;
    double stddev = 1.0;
};

/// Equal-width density histogram; edges.size() == densities.size() + 1 and
/// the densities integrate to 1.
struct HistogramModel {
    std::vector<double> edges;
    std::vector<double> densities;
};

/// A fitted probe density with the observed sample range it came from.
/// The range bounds the crossing search in intersect_bounds.
struct ProbeDistribution {
    std::optional<ProbeId> probe;
    std::variant<GaussianModel, HistogramModel> model = GaussianModel{};
    std::size_t sample_count = 0;
    double support_lo = 0.0;
    double support_hi = 0.0;

    bool is_gaussian() const { return std::holds_alternative<GaussianModel>(model); }

    double pdf(double x) const {
        if (const auto* g = std::get_if<GaussianModel>(&model)) {
            const double z = (x - g->mean) / g->stddev;
            return std::exp(-0.5 * z * z) / (g->stddev * std::sqrt(2.0 * M_PI));
        }
        const auto& h = std::get<HistogramModel>(model);
        if (x < h.edges.front() || x > h.edges.back()) {
            return 0.0;
        }
        auto it = std::upper_bound(h.edges.begin(), h.edges.end(), x);
        std::size_t idx = it == h.edges.begin() ? 0 : static_cast<std::size_t>(it - h.edges.begin()) - 1;
        if (idx >= h.densities.size()) {
            idx = h.densities.size() - 1;  // x exactly on the last edge
        }
        return h.densities[idx];
    }

    /// Location of the density peak.
    double mode() const {
        if (const auto* g = std::get_if<GaussianModel>(&model)) {
            return g->mean;
        }
        const auto& h = std::get<HistogramModel>(model);
        std::size_t best = 0;
        for (std::size_t i = 1; i < h.densities.size(); ++i) {
            if (h.densities[i] > h.densities[best]) {
                best = i;
            }
        }
        return (h.edges[best] + h.edges[best + 1]) / 2.0;
    }

    /// Probability mass on [a, b]; composite-Simpson quadrature for the
    /// gaussian, exact bin sums for the histogram. Infinite bounds are
    /// clipped to where the density is negligible.
    double mass(double a, double b) const {
        if (b <= a) {
            return 0.0;
        }
        if (const auto* g = std::get_if<GaussianModel>(&model)) {
            const double lo = std::isinf(a) ? g->mean - 10.0 * g->stddev : a;
            const double hi = std::isinf(b) ? g->mean + 10.0 * g->stddev : b;
            if (hi <= lo) {
                return 0.0;
            }
            constexpr int kSteps = 4096;  // even
            const double h = (hi - lo) / kSteps;
            double sum = pdf(lo) + pdf(hi);
            for (int i = 1; i < kSteps; ++i) {
                sum += pdf(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
            }
            return std::clamp(sum * h / 3.0, 0.0, 1.0);
        }
        const auto& hmod = std::get<HistogramModel>(model);
        double total = 0.0;
        for (std::size_t i = 0; i < hmod.densities.size(); ++i) {
            const double lo = std::max(a, hmod.edges[i]);
            const double hi = std::min(b, hmod.edges[i + 1]);
            if (hi > lo) {
                total += hmod.densities[i] * (hi - lo);
            }
        }
        return std::clamp(total, 0.0, 1.0);
    }
};

/// Convenience for constructing an analytic gaussian distribution (tests,
/// calibration provenance). Support defaults to mean +/- 8 sigma.
inline ProbeDistribution gaussian_distribution(double mean, double stddev,
                                               std::size_t sample_count = 0) {
    ProbeDistribution d;
    d.model = GaussianModel{mean, stddev};
    d.sample_count = sample_count;
    d.support_lo = mean - 8.0 * stddev;
    d.support_hi = mean + 8.0 * stddev;
    return d;
}

namespace detail {

/// Linear-interpolated quantile of sorted data, p in [0,1].
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) {
        return sorted[0];
    }
    const double idx = p * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(idx));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = idx - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

inline double excess_kurtosis(std::span<const double> xs, double mean, double stddev) {
    double m4 = 0.0;
    for (double x : xs) {
        const double z = (x - mean) / stddev;
        m4 += z * z * z * z;
    }
    return m4 / static_cast<double>(xs.size()) - 3.0;
}

}  // namespace detail

/// Fit a density model to scalar samples. Gaussian uses maximum-likelihood
/// mean and population standard deviation; histogram uses Freedman-Diaconis
/// equal-width binning normalized to unit mass.
///
/// Throws when there are fewer than min_samples values, when a value is not
/// finite, or when the sample variance is zero (degenerate distribution).
inline ProbeDistribution fit_distribution(std::span<const double> samples, ModelKind kind,
                                          std::size_t min_samples = 30,
                                          std::optional<ProbeId> probe = std::nullopt) {
    if (samples.size() < min_samples) {
        throw std::invalid_argument("fit_distribution: too few samples (" +
                                    std::to_string(samples.size()) + " < " +
                                    std::to_string(min_samples) + ")");
    }
    for (double x : samples) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument("fit_distribution: non-finite sample");
        }
    }
    const double n = static_cast<double>(samples.size());
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double var = 0.0;
    for (double x : samples) {
        var += (x - mean) * (x - mean);
    }
    var /= n;
    if (var <= 0.0) {
        throw std::invalid_argument("fit_distribution: zero variance (degenerate distribution)");
    }

    ProbeDistribution d;
    d.probe = probe;
    d.sample_count = samples.size();
    auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    d.support_lo = *lo_it;
    d.support_hi = *hi_it;

    if (kind == ModelKind::gaussian) {
        d.model = GaussianModel{mean, std::sqrt(var)};
        return d;
    }

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = detail::quantile_sorted(sorted, 0.75) - detail::quantile_sorted(sorted, 0.25);
    const double range = d.support_hi - d.support_lo;
    double width = 2.0 * iqr / std::cbrt(n);
    if (width <= 0.0) {
        width = range / std::ceil(std::sqrt(n));  // IQR collapsed; fall back
    }
    int bins = static_cast<int>(std::ceil(range / width));
    bins = std::clamp(bins, 1, 512);
    const double bin_w = range / bins;

    HistogramModel h;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) {
        h.edges[static_cast<std::size_t>(i)] = d.support_lo + bin_w * i;
    }
    h.edges.back() = d.support_hi;
    h.densities.assign(static_cast<std::size_t>(bins), 0.0);
    for (double x : sorted) {
        int idx = static_cast<int>((x - d.support_lo) / bin_w);
        idx = std::clamp(idx, 0, bins - 1);
        h.densities[static_cast<std::size_t>(idx)] += 1.0;
    }
    for (auto& dens : h.densities) {
        dens /= n * bin_w;
    }
    d.model = std::move(h);
    return d;
}

/// Crossing points of the TP and FP densities bracketing the TP mode, and
/// the TP mass between them.
struct IntersectionResult {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    double p_tp = 0.0;
};

/// Find where the TP and FP densities cross on either side of the TP mode.
/// The search runs over the union of the observed supports, seeded on a
/// 512-point grid with bracketed bisection on the density difference.
/// Sides with no crossing stay at -inf / +inf.
///
/// Throws when the densities are indistinguishable over the whole range
/// (the probe carries no TP/FP information).
inline IntersectionResult intersect_bounds(const ProbeDistribution& tp,
                                           const ProbeDistribution& fp) {
    if (tp.probe && fp.probe && *tp.probe != *fp.probe) {
        throw std::invalid_argument("intersect_bounds: distributions are over different probes");
    }
    const double lo = std::min(tp.support_lo, fp.support_lo);
    const double hi = std::max(tp.support_hi, fp.support_hi);
    if (!(hi > lo)) {
        throw std::invalid_argument("intersect_bounds: empty search range");
    }

    auto diff = [&](double x) { return tp.pdf(x) - fp.pdf(x); };

    constexpr int kGrid = 512;
    const double step = (hi - lo) / (kGrid - 1);
    std::vector<double> xs(kGrid), ds(kGrid);
    double peak = 0.0;
    double max_abs_diff = 0.0;
    for (int i = 0; i < kGrid; ++i) {
        xs[static_cast<std::size_t>(i)] = lo + step * i;
        const double d = diff(xs[static_cast<std::size_t>(i)]);
        ds[static_cast<std::size_t>(i)] = d;
        max_abs_diff = std::max(max_abs_diff, std::abs(d));
        peak = std::max({peak, tp.pdf(xs[static_cast<std::size_t>(i)]),
                         fp.pdf(xs[static_cast<std::size_t>(i)])});
    }
    if (max_abs_diff <= 1e-12 * std::max(peak, 1e-300)) {
        throw std::invalid_argument(
            "intersect_bounds: TP and FP densities are indistinguishable (probe uninformative)");
    }

    auto bisect = [&](double a, double b) {
        double fa = diff(a);
        for (int it = 0; it < 200 && b - a > 1e-13 * (hi - lo); ++it) {
            const double m = (a + b) / 2.0;
            const double fm = diff(m);
            if ((fa <= 0.0) == (fm <= 0.0)) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        return (a + b) / 2.0;
    };

    std::vector<double> roots;
    for (int i = 0; i + 1 < kGrid; ++i) {
        const double d0 = ds[static_cast<std::size_t>(i)];
        const double d1 = ds[static_cast<std::size_t>(i + 1)];
        if (d0 == 0.0) {
            roots.push_back(xs[static_cast<std::size_t>(i)]);
        } else if ((d0 < 0.0) != (d1 < 0.0)) {
            roots.push_back(bisect(xs[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(i + 1)]));
        }
    }

    IntersectionResult r;
    const double mode = tp.mode();
    for (double root : roots) {
        if (root < mode) {
            r.lower = std::isinf(r.lower) ? root : std::max(r.lower, root);
        } else if (root > mode) {
            r.upper = std::isinf(r.upper) ? root : std::min(r.upper, root);
        }
    }
    r.p_tp = tp.mass(r.lower, r.upper);
    return r;
}

}  // namespace cogsense

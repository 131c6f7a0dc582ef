#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cogsense/adaptation.hpp"
#include "cogsense/axiom.hpp"
#include "cogsense/distribution.hpp"
#include "cogsense/probes.hpp"

namespace cogsense {

enum class Label { true_positive, false_positive };

/// One detection's probes with its ground-truth label (IoU >= 0.5 match).
struct LabeledSample {
    ProbeVector probes;
    Label label = Label::false_positive;
};

struct CalibrationConfig {
    int window = 10;                // M written into every emitted axiom
    std::size_t min_samples = 30;   // per side, per probe
    double kurtosis_limit = 2.0;    // |excess kurtosis| beyond this -> histogram model
};

/// Fitted evidence behind one emitted axiom.
struct ProbeCalibration {
    ProbeId probe;
    ProbeDistribution tp;
    ProbeDistribution fp;
    AxiomSpec axiom;
};

struct CalibrationResult {
    std::vector<AxiomFormula> axioms;
    DesiredTargets targets;
    std::vector<ProbeCalibration> fits;
    std::vector<std::string> skipped;  // "probe: reason" for probes that did not calibrate
};

namespace detail {

inline std::vector<double> defined_values(const std::vector<LabeledSample>& samples, ProbeId probe,
                                          Label label) {
    std::vector<double> out;
    for (const LabeledSample& s : samples) {
        if (s.label != label) {
            continue;
        }
        if (const auto v = s.probes.get(probe); v && std::isfinite(*v)) {
            out.push_back(*v);
        }
    }
    return out;
}

/// Gaussian by default; histogram when the shape is clearly non-gaussian.
inline ModelKind choose_model(std::span<const double> xs, double kurtosis_limit) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) {
        mean += x;
    }
    mean /= n;
    double var = 0.0;
    for (double x : xs) {
        var += (x - mean) * (x - mean);
    }
    var /= n;
    if (var <= 0.0) {
        return ModelKind::gaussian;  // fit_distribution will reject it either way
    }
    const double kurt = excess_kurtosis(xs, mean, std::sqrt(var));
    return std::abs(kurt) > kurtosis_limit ? ModelKind::histogram : ModelKind::gaussian;
}

inline double mean_of(std::span<const double> xs, double fallback) {
    if (xs.empty()) {
        return fallback;
    }
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
    }
    return sum / static_cast<double>(xs.size());
}

}  // namespace detail

/// Fit TP/FP distributions per probe, intersect them, and emit one axiom
/// per informative probe. Deviation probes get their lower bound anchored
/// at zero (they measure a non-negative error). Probes that cannot
/// calibrate are skipped with a recorded reason; an entirely empty axiom
/// set is refused.
inline CalibrationResult calibrate(const std::vector<LabeledSample>& samples,
                                   const CalibrationConfig& cfg = {}) {
    CalibrationResult result;
    for (ProbeId probe : kAllProbes) {
        const std::string name(probe_name(probe));
        const auto tp_vals = detail::defined_values(samples, probe, Label::true_positive);
        const auto fp_vals = detail::defined_values(samples, probe, Label::false_positive);
        if (tp_vals.size() < cfg.min_samples || fp_vals.size() < cfg.min_samples) {
            result.skipped.push_back(name + ": insufficient samples (tp=" +
                                     std::to_string(tp_vals.size()) +
                                     ", fp=" + std::to_string(fp_vals.size()) + ")");
            continue;
        }
        ProbeDistribution tp, fp;
        try {
            tp = fit_distribution(tp_vals, detail::choose_model(tp_vals, cfg.kurtosis_limit),
                                  cfg.min_samples, probe);
            fp = fit_distribution(fp_vals, detail::choose_model(fp_vals, cfg.kurtosis_limit),
                                  cfg.min_samples, probe);
        } catch (const std::exception& e) {
            result.skipped.push_back(name + ": " + e.what());
            continue;
        }

        IntersectionResult bounds;
        try {
            bounds = intersect_bounds(tp, fp);
        } catch (const std::exception& e) {
            result.skipped.push_back(name + ": " + e.what());
            continue;
        }
        if (is_deviation_probe(probe)) {
            if (std::isinf(bounds.upper)) {
                // [0, inf) accepts every value of a non-negative probe
                result.skipped.push_back(name + ": no upper crossing, axiom would be vacuous");
                continue;
            }
            bounds.lower = 0.0;
            bounds.p_tp = tp.mass(bounds.lower, bounds.upper);
        }
        if (std::isinf(bounds.lower) && std::isinf(bounds.upper)) {
            result.skipped.push_back(name + ": no density crossing within the observed range");
            continue;
        }

        AxiomSpec spec;
        spec.probe = probe;
        spec.lower = bounds.lower;
        spec.upper = bounds.upper;
        spec.p_tp = std::clamp(bounds.p_tp, 1e-9, 1.0 - 1e-9);
        spec.window = cfg.window;
        spec.epsilon = 1.0 - spec.p_tp;
        result.axioms.push_back(make_formula(name, spec));
        result.fits.push_back({probe, std::move(tp), std::move(fp), spec});
    }
    if (result.axioms.empty()) {
        throw std::runtime_error("calibrate: no probe calibrated, refusing to emit an empty axiom set");
    }
    result.targets.contrast = detail::mean_of(
        detail::defined_values(samples, ProbeId::contrast, Label::true_positive), 0.5);
    result.targets.entropy_bits = detail::mean_of(
        detail::defined_values(samples, ProbeId::entropy_bits, Label::true_positive), 4.0);
    return result;
}

/// The axiom set alone (the common entry point; calibrate() keeps the
/// fitted evidence for provenance output).
inline std::vector<AxiomSpec> build_axiom_set(const std::vector<LabeledSample>& samples,
                                              const CalibrationConfig& cfg = {}) {
    CalibrationResult r = calibrate(samples, cfg);
    std::vector<AxiomSpec> out;
    out.reserve(r.axioms.size());
    for (const AxiomFormula& f : r.axioms) {
        out.push_back(f.spec);
    }
    return out;
}

}  // namespace cogsense

#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "cogsense/image.hpp"
#include "cogsense/monitor.hpp"
#include "cogsense/probes.hpp"

namespace cogsense {

/// Contrast and entropy operating points taken from the training phase
/// (entropy is monitored but has no actuation path).
struct DesiredTargets {
    double contrast = 0.5;      // c_D
    double entropy_bits = 4.0;  // E_D
};

/// The control applied to one frame. bound_b == delta_c * (i_max + i_min)/2
/// holds exactly; delta_c == 0 marks the identity (nothing fired).
struct AdaptationCommand {
    double delta_c = 0.0;
    double bound_b = 0.0;
    int i_max = 0;
    int i_min = 0;
    int source_detections = 0;   // contrasts entering the optimization
    int flagged_detections = 0;  // verdicts marked erroneous

    bool fired() const { return delta_c != 0.0; }
};

enum class AdaptationMode { full_frame, roi_only };

struct AdaptationConfig {
    AdaptationMode mode = AdaptationMode::full_frame;
    /// Corrections smaller than this are not worth a remap pass; keeps the
    /// loop quiet when flagged detections already sit at the target.
    double min_actionable_delta = 0.02;
};

/// L1-optimal shift of the per-detection contrasts relative to the target:
/// argmin over d of sum_i |c_i - c_D - d|, which the median solves in
/// closed form. Even-sized lists have a flat optimum between the two middle
/// order statistics; the midpoint is returned. Positive means the
/// detections sit above the target.
inline double optimal_contrast_delta(std::span<const double> contrasts, double desired_contrast) {
    if (contrasts.empty()) {
        throw std::invalid_argument("optimal_contrast_delta: no detections to adapt from");
    }
    std::vector<double> sorted(contrasts.begin(), contrasts.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median =
        n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
    return median - desired_contrast;
}

/// Histogram expansion that realizes a contrast change of delta_c for a
/// region with extremes [i_min, i_max]: B = delta_c * (i_max + i_min) / 2.
inline double histogram_bound(double delta_c, double i_max, double i_min) {
    if (i_min > i_max) {
        throw std::invalid_argument("histogram_bound: i_min exceeds i_max");
    }
    return delta_c * (i_max + i_min) / 2.0;
}

namespace detail {

inline std::uint8_t remap_pixel(std::uint8_t v, double mid, double scale) {
    const double mapped = (static_cast<double>(v) - mid) * scale + mid;
    const double rounded = mapped >= 0.0 ? std::floor(mapped + 0.5) : std::ceil(mapped - 0.5);
    return static_cast<std::uint8_t>(std::clamp(rounded, 0.0, 255.0));
}

}  // namespace detail

/// Linear intensity remap that sends i_min -> i_min - B and i_max ->
/// i_max + B, rounded half-away-from-zero and clamped to [0,255].
/// A degenerate range (i_min == i_max) cannot be remapped and returns the
/// image unchanged.
inline GrayImage apply_contrast(const GrayImage& img, double bound_b, int i_max, int i_min) {
    if (i_min >= i_max) {
        return img;
    }
    const double mid = (static_cast<double>(i_max) + i_min) / 2.0;
    const double scale = (static_cast<double>(i_max) - i_min + 2.0 * bound_b) /
                         (static_cast<double>(i_max) - i_min);
    GrayImage out = img;
    for (auto& v : out.pixels) {
        v = detail::remap_pixel(v, mid, scale);
    }
    return out;
}

/// Same remap restricted to the pixels inside the given boxes; everything
/// outside is left bit-identical.
inline GrayImage apply_contrast_roi(const GrayImage& img, std::span<const BoundingBox> boxes,
                                    double bound_b, int i_max, int i_min) {
    if (i_min >= i_max) {
        return img;
    }
    const double mid = (static_cast<double>(i_max) + i_min) / 2.0;
    const double scale = (static_cast<double>(i_max) - i_min + 2.0 * bound_b) /
                         (static_cast<double>(i_max) - i_min);
    GrayImage out = img;
    for (const BoundingBox& box : boxes) {
        const PixelRect r = pixel_rect(box, img.width, img.height);
        for (int y = r.y0; y < r.y1; ++y) {
            for (int x = r.x0; x < r.x1; ++x) {
                out.set(x, y, detail::remap_pixel(img.at(x, y), mid, scale));
            }
        }
    }
    return out;
}

/// Close the loop for one frame: when any detection is flagged erroneous,
/// compute the contrast correction from all current detections and remap
/// the frame so re-detection sees it.
///
/// The applied delta is the negated L1 deviation (measured contrast below
/// the target yields a positive delta, expanding the histogram). The
/// intensity extremes are measured over the union of the detection boxes,
/// not the whole frame.
inline std::pair<GrayImage, AdaptationCommand> adapt_frame(const GrayImage& img,
                                                           const std::vector<DetectionVerdict>& verdicts,
                                                           std::span<const ProbeVector> probes,
                                                           const DesiredTargets& targets,
                                                           const AdaptationConfig& cfg = {}) {
    if (probes.size() != verdicts.size()) {
        throw std::invalid_argument("adapt_frame: probes and verdicts misaligned");
    }
    AdaptationCommand cmd;
    cmd.source_detections = static_cast<int>(verdicts.size());
    for (const auto& v : verdicts) {
        cmd.flagged_detections += v.erroneous ? 1 : 0;
    }
    if (verdicts.empty() || cmd.flagged_detections == 0) {
        return {img, cmd};
    }

    std::vector<double> contrasts;
    contrasts.reserve(probes.size());
    for (const ProbeVector& p : probes) {
        contrasts.push_back(p.contrast);
    }
    const double delta = -optimal_contrast_delta(contrasts, targets.contrast);
    if (std::abs(delta) < cfg.min_actionable_delta) {
        return {img, cmd};
    }

    int lo = 255, hi = 0;
    std::vector<BoundingBox> boxes;
    boxes.reserve(verdicts.size());
    for (const auto& v : verdicts) {
        boxes.push_back(v.detection.bbox);
        const PixelRect r = pixel_rect(v.detection.bbox, img.width, img.height);
        for (int y = r.y0; y < r.y1; ++y) {
            for (int x = r.x0; x < r.x1; ++x) {
                const int p = img.at(x, y);
                lo = std::min(lo, p);
                hi = std::max(hi, p);
            }
        }
    }
    if (lo >= hi) {
        return {img, cmd};  // uniform region, nothing to stretch
    }

    cmd.delta_c = delta;
    cmd.i_max = hi;
    cmd.i_min = lo;
    cmd.bound_b = histogram_bound(delta, hi, lo);
    GrayImage out = cfg.mode == AdaptationMode::full_frame
                        ? apply_contrast(img, cmd.bound_b, hi, lo)
                        : apply_contrast_roi(img, boxes, cmd.bound_b, hi, lo);
    return {std::move(out), cmd};
}

}  // namespace cogsense

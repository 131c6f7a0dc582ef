#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string_view>

#include "cogsense/core.hpp"
#include "cogsense/image.hpp"

namespace cogsense {

/// The eight scalar signals computed per detection. Deviation probes need
/// track history and are undefined on young tracks.
enum class ProbeId {
    size_px2,
    aspect,
    confidence,
    contrast,
    entropy_bits,
    loc_dev_px,
    bbox_dev_rel,
    id_consistency,
};

inline constexpr std::array<ProbeId, 8> kAllProbes = {
    ProbeId::size_px2,   ProbeId::aspect,       ProbeId::confidence,   ProbeId::contrast,
    ProbeId::entropy_bits, ProbeId::loc_dev_px, ProbeId::bbox_dev_rel, ProbeId::id_consistency,
};

inline constexpr std::string_view probe_name(ProbeId id) {
    switch (id) {
        case ProbeId::size_px2: return "size_px2";
        case ProbeId::aspect: return "aspect";
        case ProbeId::confidence: return "confidence";
        case ProbeId::contrast: return "contrast";
        case ProbeId::entropy_bits: return "entropy_bits";
        case ProbeId::loc_dev_px: return "loc_dev_px";
        case ProbeId::bbox_dev_rel: return "bbox_dev_rel";
        case ProbeId::id_consistency: return "id_consistency";
    }
    return "?";
}

inline std::optional<ProbeId> probe_from_name(std::string_view name) {
    for (ProbeId id : kAllProbes) {
        if (probe_name(id) == name) {
            return id;
        }
    }
    return std::nullopt;
}

/// True for probes that measure a non-negative deviation from an expected
/// value (these get one-sided axioms anchored at zero).
inline constexpr bool is_deviation_probe(ProbeId id) {
    return id == ProbeId::loc_dev_px || id == ProbeId::bbox_dev_rel;
}

/// Sliding-window parameters shared by probes and axiom evaluation.
/// `window` is the number of most recent frames a temporal probe looks at;
/// `min_history` is how many in-window detections a track needs before the
/// deviation probes are defined.
struct WindowConfig {
    int window = 10;
    int min_history = 3;
};

struct ProbeVector {
    double size_px2 = 0.0;
    double aspect = 0.0;
    double confidence = 0.0;
    double contrast = 0.0;
    double entropy_bits = 0.0;
    std::optional<double> loc_dev_px;
    std::optional<double> bbox_dev_rel;
    double id_consistency = 0.0;

    std::optional<double> get(ProbeId id) const {
        switch (id) {
            case ProbeId::size_px2: return size_px2;
            case ProbeId::aspect: return aspect;
            case ProbeId::confidence: return confidence;
            case ProbeId::contrast: return contrast;
            case ProbeId::entropy_bits: return entropy_bits;
            case ProbeId::loc_dev_px: return loc_dev_px;
            case ProbeId::bbox_dev_rel: return bbox_dev_rel;
            case ProbeId::id_consistency: return id_consistency;
        }
        return std::nullopt;
    }
};

/// Peak-to-peak (Michelson) contrast (I_max - I_min) / (I_max + I_min).
/// A uniform crop has no contrast, so the degenerate I_max == I_min case
/// (including the all-zero crop, where the ratio is 0/0) returns 0.
inline double michelson_contrast(const GrayImage& region) {
    auto [lo, hi] = intensity_range(region);
    if (lo == hi) {
        return 0.0;
    }
    return static_cast<double>(hi - lo) / static_cast<double>(hi + lo);
}

/// Shannon entropy (bits) of the intensity histogram. `bins` must divide 256.
inline double shannon_entropy(const GrayImage& region, int bins = 256) {
    if (region.empty()) {
        throw std::invalid_argument("shannon_entropy: empty region");
    }
    if (bins <= 0 || 256 % bins != 0) {
        throw std::invalid_argument("shannon_entropy: bins must divide 256");
    }
    const int shift = 256 / bins;
    std::vector<std::size_t> hist(static_cast<std::size_t>(bins), 0);
    for (std::uint8_t v : region.pixels) {
        ++hist[v / shift];
    }
    const double n = static_cast<double>(region.size());
    double bits = 0.0;
    for (std::size_t c : hist) {
        if (c == 0) {
            continue;
        }
        const double p = static_cast<double>(c) / n;
        bits -= p * std::log2(p);
    }
    return bits;
}

namespace detail {

/// In-window history of a track strictly before t_k: detections with
/// frame_index in [t_k - M, t_k - 1].
inline std::vector<const Detection*> window_history(const Track& track, int t_k,
                                                    const WindowConfig& cfg) {
    std::vector<const Detection*> out;
    for (const Detection& d : track.detections) {
        if (d.frame_index >= t_k) {
            break;
        }
        if (d.frame_index >= t_k - cfg.window) {
            out.push_back(&d);
        }
    }
    return out;
}

/// Least-squares line fit y = a + b*t; returns prediction at t_pred.
inline double linear_extrapolate(const std::vector<double>& ts, const std::vector<double>& ys,
                                 double t_pred) {
    const double n = static_cast<double>(ts.size());
    double t_mean = 0.0, y_mean = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        t_mean += ts[i];
        y_mean += ys[i];
    }
    t_mean /= n;
    y_mean /= n;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        num += (ts[i] - t_mean) * (ys[i] - y_mean);
        den += (ts[i] - t_mean) * (ts[i] - t_mean);
    }
    const double slope = den > 0.0 ? num / den : 0.0;
    return y_mean + slope * (t_pred - t_mean);
}

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) {
        return v[n / 2];
    }
    return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace detail

/// Distance between the observed box center at t_k and the center predicted
/// by a per-coordinate linear least-squares fit over the window history.
/// Undefined (nullopt) when the track has fewer than min_history in-window
/// detections before t_k.
inline std::optional<double> localization_deviation(const Track& track, int t_k,
                                                    const WindowConfig& cfg) {
    const Detection* now = track.at_frame(t_k);
    if (now == nullptr) {
        return std::nullopt;
    }
    const auto hist = detail::window_history(track, t_k, cfg);
    if (static_cast<int>(hist.size()) < std::max(cfg.min_history, 1)) {
        return std::nullopt;
    }
    std::vector<double> ts, xs, ys;
    ts.reserve(hist.size());
    xs.reserve(hist.size());
    ys.reserve(hist.size());
    for (const Detection* d : hist) {
        const Point2 c = d->bbox.center();
        ts.push_back(static_cast<double>(d->frame_index));
        xs.push_back(c.x);
        ys.push_back(c.y);
    }
    const double px = detail::linear_extrapolate(ts, xs, static_cast<double>(t_k));
    const double py = detail::linear_extrapolate(ts, ys, static_cast<double>(t_k));
    const Point2 obs = now->bbox.center();
    return std::hypot(obs.x - px, obs.y - py);
}

/// Relative deviation of the box area at t_k from the window median area.
/// Undefined on insufficient history, like localization_deviation.
inline std::optional<double> bbox_size_deviation(const Track& track, int t_k,
                                                 const WindowConfig& cfg) {
    const Detection* now = track.at_frame(t_k);
    if (now == nullptr) {
        return std::nullopt;
    }
    const auto hist = detail::window_history(track, t_k, cfg);
    if (static_cast<int>(hist.size()) < std::max(cfg.min_history, 1)) {
        return std::nullopt;
    }
    std::vector<double> areas;
    areas.reserve(hist.size());
    for (const Detection* d : hist) {
        areas.push_back(d->bbox.area());
    }
    const double desired = detail::median_of(std::move(areas));
    if (desired <= 0.0) {
        return std::nullopt;
    }
    return std::abs(now->bbox.area() - desired) / desired;
}

/// Fraction of the last `window` frames [t_k - M + 1, t_k] in which the track
/// has a detection. Frames before the start of the stream count as absent.
inline double id_consistency(const Track& track, int t_k, const WindowConfig& cfg) {
    const int lo = t_k - cfg.window + 1;
    int present = 0;
    for (const Detection& d : track.detections) {
        if (d.frame_index > t_k) {
            break;
        }
        if (d.frame_index >= lo) {
            ++present;
        }
    }
    return static_cast<double>(present) / static_cast<double>(cfg.window);
}

/// All eight probes for one detection at frame t_k. `img` must be frame
/// t_k's image and `det` must belong to `track`.
inline ProbeVector compute_probe_vector(const Detection& det, const Track& track,
                                        const GrayImage& img, int t_k, const WindowConfig& cfg) {
    ProbeVector p;
    p.size_px2 = det.bbox.area();
    p.aspect = det.bbox.w / det.bbox.h;
    p.confidence = det.confidence;
    const GrayImage region = crop(img, det.bbox);
    p.contrast = michelson_contrast(region);
    p.entropy_bits = shannon_entropy(region);
    p.loc_dev_px = localization_deviation(track, t_k, cfg);
    p.bbox_dev_rel = bbox_size_deviation(track, t_k, cfg);
    p.id_consistency = id_consistency(track, t_k, cfg);
    return p;
}

}  // namespace cogsense

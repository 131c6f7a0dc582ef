#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "cogsense/core.hpp"
#include "cogsense/image.hpp"
#include "cogsense/probes.hpp"
#include "cogsense/sim/random.hpp"

namespace cogsense::sim {

/// Mock detector whose recall follows a logistic curve in the crop's
/// Michelson contrast: p_detect(C) = 1 / (1 + exp(-(C - c0)/s)). Spurious
/// detections arrive as a Poisson stream whose rate grows as scene quality
/// drops below the detector's comfort point (low-quality imagery produces
/// more false alarms), scaled by fp_low_contrast_boost; set the boost to 0
/// for a constant rate.
struct DetectorModel {
    double contrast_midpoint = 0.35;  // c0
    double contrast_slope = 0.04;     // s
    double base_fp_rate = 0.5;        // expected FPs/frame at full quality
    double fp_low_contrast_boost = 3.0;
    double bbox_jitter_std = 0.5;      // pixels
    double confidence_noise_std = 0.02;
    double fp_box_lo = 8.0;  // spurious box edge lengths, pixels
    double fp_box_hi = 40.0;
    double fp_confidence_lo = 0.05;
    double fp_confidence_hi = 0.5;
    std::uint64_t seed = 7;
};

inline double detection_probability(const DetectorModel& m, double contrast) {
    return 1.0 / (1.0 + std::exp(-(contrast - m.contrast_midpoint) / m.contrast_slope));
}

/// Stateful wrapper so a whole run consumes one seeded stream. Value type:
/// copyable, so callers can checkpoint it if they need to.
class SyntheticDetector {
   public:
    explicit SyntheticDetector(const DetectorModel& model) : model_(model), rng_(model.seed) {}

    /// Emit detections for one frame given its ground-truth boxes.
    std::vector<Detection> detect(int frame_index, const GrayImage& frame,
                                  const std::vector<Detection>& gt) {
        std::vector<Detection> out;
        double quality_sum = 0.0;
        for (const Detection& g : gt) {
            const double contrast = michelson_contrast(crop(frame, g.bbox));
            const double p = detection_probability(model_, contrast);
            quality_sum += p;
            if (rng_.uniform() >= p) {
                continue;  // missed
            }
            Detection d;
            d.frame_index = frame_index;
            d.class_id = g.class_id;
            BoundingBox b = g.bbox;
            if (model_.bbox_jitter_std > 0.0) {
                b.x += rng_.normal(0.0, model_.bbox_jitter_std);
                b.y += rng_.normal(0.0, model_.bbox_jitter_std);
                b.w = std::max(1.0, b.w + rng_.normal(0.0, model_.bbox_jitter_std));
                b.h = std::max(1.0, b.h + rng_.normal(0.0, model_.bbox_jitter_std));
            }
            d.bbox = clamp_to_frame(b, frame.width, frame.height).value_or(b);
            double conf = p;
            if (model_.confidence_noise_std > 0.0) {
                conf += rng_.normal(0.0, model_.confidence_noise_std);
            }
            d.confidence = std::clamp(conf, 0.0, 1.0);
            out.push_back(d);
        }

        const double quality = gt.empty() ? 1.0 : quality_sum / static_cast<double>(gt.size());
        const double rate =
            model_.base_fp_rate * (1.0 + model_.fp_low_contrast_boost * (1.0 - quality));
        const int spurious = rng_.poisson(rate);
        for (int i = 0; i < spurious; ++i) {
            const double w = rng_.uniform(model_.fp_box_lo, model_.fp_box_hi);
            const double h = rng_.uniform(model_.fp_box_lo, model_.fp_box_hi);
            Detection d;
            d.frame_index = frame_index;
            d.class_id = 0;
            d.bbox.w = std::min(w, static_cast<double>(frame.width));
            d.bbox.h = std::min(h, static_cast<double>(frame.height));
            d.bbox.x = rng_.uniform(0.0, frame.width - d.bbox.w);
            d.bbox.y = rng_.uniform(0.0, frame.height - d.bbox.h);
            d.confidence = rng_.uniform(model_.fp_confidence_lo, model_.fp_confidence_hi);
            out.push_back(d);
        }
        return out;
    }

    const DetectorModel& model() const { return model_; }

   private:
    DetectorModel model_;
    Rng rng_;
};

/// One-shot form for a single frame.
inline std::vector<Detection> synthetic_detect(const GrayImage& frame,
                                               const std::vector<Detection>& gt,
                                               const DetectorModel& model, int frame_index = 0) {
    SyntheticDetector det(model);
    return det.detect(frame_index, frame, gt);
}

}  // namespace cogsense::sim

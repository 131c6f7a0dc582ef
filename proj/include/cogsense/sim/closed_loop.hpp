#pragma once

#include <string>
#include <vector>

#include "cogsense/adaptation.hpp"
#include "cogsense/calibration.hpp"
#include "cogsense/monitor.hpp"
#include "cogsense/sim/detector.hpp"
#include "cogsense/sim/metrics.hpp"
#include "cogsense/sim/scene.hpp"

namespace cogsense::sim {

enum class Method { baseline, hist_eq, cogsense };

inline std::string_view method_name(Method m) {
    switch (m) {
        case Method::baseline: return "baseline";
        case Method::hist_eq: return "hist_eq";
        case Method::cogsense: return "cogsense";
    }
    return "?";
}

inline std::optional<Method> method_from_name(std::string_view name) {
    for (Method m : {Method::baseline, Method::hist_eq, Method::cogsense}) {
        if (method_name(m) == name) {
            return m;
        }
    }
    return std::nullopt;
}

struct LoopConfig {
    MonitorConfig monitor;
    TrackerConfig tracker;
    AdaptationConfig adaptation;
    double iou_thresh = 0.5;
    std::vector<double> sweep;  // empty -> default_sweep()
};

/// Fired command with the frame it applied to.
struct FiredCommand {
    int frame_index = 0;
    AdaptationCommand command;
};

/// Per-method raw outputs for callers that want more than the report.
struct LoopArtifacts {
    std::map<std::string, std::vector<std::vector<Detection>>> final_detections;
    std::vector<FiredCommand> commands;  // cogsense only
};

/// Detect over the whole scene with an optional per-frame enhancement.
template <typename FrameFn>
inline std::vector<std::vector<Detection>> detect_stream(const Scene& scene,
                                                         const DetectorModel& model,
                                                         FrameFn&& enhance) {
    SyntheticDetector detector(model);
    const auto gt = detections_by_frame(scene.gt_tracks, static_cast<int>(scene.frames.size()));
    std::vector<std::vector<Detection>> out;
    out.reserve(scene.frames.size());
    for (std::size_t f = 0; f < scene.frames.size(); ++f) {
        const GrayImage img = enhance(scene.frames[f]);
        out.push_back(detector.detect(static_cast<int>(f), img, gt[f]));
    }
    return out;
}

/// The feedback loop: per frame, detect, track, compute probes, evaluate
/// the axioms, and when a detection is flagged erroneous, remap the frame's
/// contrast and re-detect on the corrected image. Re-detection replaces the
/// frame's detections (tracker and probe history rewind to the frame start
/// so downstream state follows the replacement).
inline std::vector<std::vector<Detection>> run_cogsense_stream(
    const Scene& scene, const DetectorModel& model, const std::vector<AxiomFormula>& axioms,
    const DesiredTargets& targets, const LoopConfig& cfg, std::vector<FiredCommand>* commands) {
    SyntheticDetector detector(model);
    StreamMonitor monitor(axioms, cfg.monitor, cfg.tracker);
    const auto gt = detections_by_frame(scene.gt_tracks, static_cast<int>(scene.frames.size()));

    std::vector<std::vector<Detection>> out;
    out.reserve(scene.frames.size());
    for (std::size_t f = 0; f < scene.frames.size(); ++f) {
        const int frame_index = static_cast<int>(f);
        const GrayImage& img = scene.frames[f];

        const StreamMonitor checkpoint = monitor;
        std::vector<Detection> dets = detector.detect(frame_index, img, gt[f]);
        std::vector<DetectionVerdict> verdicts = monitor.step(frame_index, img, dets);

        std::vector<ProbeVector> probes;
        probes.reserve(verdicts.size());
        for (const DetectionVerdict& v : verdicts) {
            const ProbeVector* p =
                monitor.history().at(*v.detection.track_id, frame_index);
            probes.push_back(p != nullptr ? *p : ProbeVector{});
        }

        auto [adapted, cmd] = adapt_frame(img, verdicts, probes, targets, cfg.adaptation);
        if (cmd.fired()) {
            if (commands != nullptr) {
                commands->push_back({frame_index, cmd});
            }
            std::vector<Detection> redets = detector.detect(frame_index, adapted, gt[f]);
            monitor = checkpoint;  // forget the replaced detections
            monitor.step(frame_index, adapted, redets);
            out.push_back(std::move(redets));
        } else {
            out.push_back(std::move(dets));
        }
    }
    return out;
}

/// Run the requested methods over one scene from identical seeds and score
/// each against the ground truth. Axioms must come from a training scene of
/// the same generator family (disjoint seed).
inline EvalReport run_closed_loop(const SceneConfig& scene_cfg, const DetectorModel& model,
                                  const std::vector<AxiomFormula>& axioms,
                                  const DesiredTargets& targets, const std::vector<Method>& methods,
                                  const LoopConfig& cfg = {}, LoopArtifacts* artifacts = nullptr) {
    const Scene scene = generate_scene(scene_cfg);
    EvalReport report;
    report.frame_count = static_cast<int>(scene.frames.size());

    for (Method m : methods) {
        std::vector<std::vector<Detection>> dets;
        std::vector<FiredCommand> commands;
        switch (m) {
            case Method::baseline:
                dets = detect_stream(scene, model, [](const GrayImage& img) { return img; });
                break;
            case Method::hist_eq:
                dets = detect_stream(scene, model,
                                     [](const GrayImage& img) { return equalize_histogram(img); });
                break;
            case Method::cogsense:
                if (axioms.empty()) {
                    throw std::invalid_argument("run_closed_loop: cogsense needs a calibrated axiom set");
                }
                dets = run_cogsense_stream(scene, model, axioms, targets, cfg, &commands);
                break;
        }
        MethodReport r = evaluate(scene.gt_tracks, dets, cfg.iou_thresh, cfg.sweep);
        r.adaptation_count = static_cast<long>(commands.size());
        report.per_method[std::string(method_name(m))] = std::move(r);
        if (artifacts != nullptr) {
            artifacts->final_detections[std::string(method_name(m))] = std::move(dets);
            if (m == Method::cogsense) {
                artifacts->commands = std::move(commands);
            }
        }
    }
    return report;
}

/// One labeled probe row with its stream coordinates.
struct LabeledProbeRecord {
    int frame_index = 0;
    int track_id = 0;
    LabeledSample sample;
};

inline std::vector<LabeledSample> strip_records(const std::vector<LabeledProbeRecord>& records) {
    std::vector<LabeledSample> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(r.sample);
    }
    return out;
}

/// Label a detection stream against ground truth (IoU >= iou_thresh, greedy
/// highest-first, per frame) and package every detection's probes as
/// calibration samples.
inline std::vector<LabeledProbeRecord> collect_labeled_probes(
    const Scene& scene, const std::vector<std::vector<Detection>>& dets,
    const WindowConfig& window, const TrackerConfig& tracker_cfg = {}, double iou_thresh = 0.5) {
    const auto gt = detections_by_frame(scene.gt_tracks, static_cast<int>(scene.frames.size()));
    StreamMonitor monitor({}, MonitorConfig{window, 1, false}, tracker_cfg);
    std::vector<LabeledProbeRecord> samples;

    for (std::size_t f = 0; f < scene.frames.size(); ++f) {
        const int frame_index = static_cast<int>(f);
        const auto verdicts = monitor.step(frame_index, scene.frames[f], dets[f]);

        // greedy IoU labeling, mirroring the evaluation matcher
        struct Pair {
            double overlap;
            std::size_t g, d;
        };
        std::vector<Pair> pairs;
        for (std::size_t g = 0; g < gt[f].size(); ++g) {
            for (std::size_t d = 0; d < verdicts.size(); ++d) {
                const double o = iou(gt[f][g].bbox, verdicts[d].detection.bbox);
                if (o >= iou_thresh) {
                    pairs.push_back({o, g, d});
                }
            }
        }
        std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
            return std::tie(b.overlap, a.g, a.d) < std::tie(a.overlap, b.g, b.d);
        });
        std::vector<bool> g_used(gt[f].size(), false);
        std::vector<Label> labels(verdicts.size(), Label::false_positive);
        std::vector<bool> d_used(verdicts.size(), false);
        for (const Pair& p : pairs) {
            if (g_used[p.g] || d_used[p.d]) {
                continue;
            }
            g_used[p.g] = true;
            d_used[p.d] = true;
            labels[p.d] = Label::true_positive;
        }
        for (std::size_t d = 0; d < verdicts.size(); ++d) {
            const int track_id = *verdicts[d].detection.track_id;
            const ProbeVector* p = monitor.history().at(track_id, frame_index);
            if (p != nullptr) {
                samples.push_back({frame_index, track_id, {*p, labels[d]}});
            }
        }
    }
    return samples;
}

}  // namespace cogsense::sim

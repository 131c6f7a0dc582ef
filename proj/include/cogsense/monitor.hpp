#pragma once

#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "cogsense/axiom.hpp"
#include "cogsense/probes.hpp"
#include "cogsense/tracker.hpp"

namespace cogsense {

/// Outcome of one axiom over one window. empirical_frequency counts only
/// defined values; a window with no defined values passes with
/// defined_samples == 0 (young tracks get the benefit of the doubt).
struct AxiomVerdict {
    std::size_t axiom_index = 0;
    double empirical_frequency = 1.0;
    int defined_samples = 0;
    bool pass = true;
};

/// Per-detection result: erroneous when at least k_min axioms fail.
struct DetectionVerdict {
    Detection detection;
    std::vector<AxiomVerdict> per_axiom;
    int violation_count = 0;
    bool erroneous = false;
};

struct MonitorConfig {
    WindowConfig window;
    int k_min = 1;
    bool use_provided_ids = false;  // trust track ids already on the detections
};

/// Evaluate one axiom over a window of probe values (oldest first, one slot
/// per frame; nullopt marks frames where the value is undefined or the
/// track is absent). The empirical in-bounds frequency is compared against
/// p_tp with an inclusive >=.
inline AxiomVerdict evaluate_axiom(const AxiomFormula& f,
                                   std::span<const std::optional<double>> window_values,
                                   std::size_t axiom_index = 0) {
    AxiomVerdict v;
    v.axiom_index = axiom_index;
    int defined = 0;
    int in_bounds = 0;
    for (const auto& val : window_values) {
        if (!val) {
            continue;
        }
        ++defined;
        if (*val >= f.spec.lower && *val <= f.spec.upper) {
            ++in_bounds;
        }
    }
    v.defined_samples = defined;
    if (defined == 0) {
        v.empirical_frequency = 1.0;
        v.pass = true;
        return v;
    }
    v.empirical_frequency = static_cast<double>(in_bounds) / static_cast<double>(defined);
    v.pass = v.empirical_frequency >= f.spec.p_tp;
    return v;
}

/// Per-track probe values keyed by frame. Value type so the closed loop can
/// checkpoint and rewind one frame.
class ProbeHistory {
   public:
    void record(int track_id, int frame_index, const ProbeVector& probes) {
        by_track_[track_id][frame_index] = probes;
    }

    /// One slot per frame in [t_k - M + 1, t_k], oldest first.
    std::vector<std::optional<double>> window_values(int track_id, ProbeId probe, int t_k,
                                                     int window) const {
        std::vector<std::optional<double>> out(static_cast<std::size_t>(window), std::nullopt);
        const auto it = by_track_.find(track_id);
        if (it == by_track_.end()) {
            return out;
        }
        const int lo = t_k - window + 1;
        for (const auto& [frame, probes] : it->second) {
            if (frame < lo || frame > t_k) {
                continue;
            }
            out[static_cast<std::size_t>(frame - lo)] = probes.get(probe);
        }
        return out;
    }

    const ProbeVector* at(int track_id, int frame_index) const {
        const auto it = by_track_.find(track_id);
        if (it == by_track_.end()) {
            return nullptr;
        }
        const auto jt = it->second.find(frame_index);
        return jt == it->second.end() ? nullptr : &jt->second;
    }

   private:
    std::map<int, std::map<int, ProbeVector>> by_track_;
};

/// Evaluate every axiom for one detection's track at frame t_k.
inline DetectionVerdict evaluate_detection(const std::vector<AxiomFormula>& axioms,
                                           const Track& track, int t_k,
                                           const ProbeHistory& history, const MonitorConfig& cfg) {
    DetectionVerdict verdict;
    const Detection* det = track.at_frame(t_k);
    if (det == nullptr) {
        throw std::invalid_argument("evaluate_detection: track has no detection at frame " +
                                    std::to_string(t_k));
    }
    verdict.detection = *det;
    verdict.per_axiom.reserve(axioms.size());
    for (std::size_t i = 0; i < axioms.size(); ++i) {
        const auto window =
            history.window_values(track.track_id, axioms[i].spec.probe, t_k, axioms[i].spec.window);
        AxiomVerdict av = evaluate_axiom(axioms[i], window, i);
        if (!av.pass) {
            ++verdict.violation_count;
        }
        verdict.per_axiom.push_back(std::move(av));
    }
    verdict.erroneous = verdict.violation_count >= cfg.k_min;
    return verdict;
}

/// Causal monitor over a detection stream. Feed frames in order; each
/// step's verdicts depend only on frames seen so far. Copyable: the closed
/// loop snapshots it before a frame and restores on re-detection.
class StreamMonitor {
   public:
    StreamMonitor(std::vector<AxiomFormula> axioms, MonitorConfig cfg = {}, TrackerConfig tcfg = {})
        : axioms_(std::move(axioms)), cfg_(cfg), tracker_(tcfg) {
        if (cfg_.window.window < 2 || cfg_.window.min_history > cfg_.window.window) {
            throw std::invalid_argument(
                "StreamMonitor: window must be >= 2 and min_history <= window");
        }
    }

    /// Track the detections, compute their probes, and evaluate all axioms.
    /// Returns one verdict per detection (same order as the tracked set).
    std::vector<DetectionVerdict> step(int frame_index, const GrayImage& image,
                                       std::vector<Detection> dets) {
        std::vector<Detection> tracked;
        if (cfg_.use_provided_ids) {
            tracked = std::move(dets);
            for (auto& d : tracked) {
                if (!d.track_id) {
                    throw std::invalid_argument("StreamMonitor: detection without track id at frame " +
                                                std::to_string(frame_index));
                }
                d.frame_index = frame_index;
            }
        } else {
            tracked = tracker_.advance(frame_index, std::move(dets));
        }
        for (const Detection& d : tracked) {
            Track& t = tracks_[*d.track_id];
            if (t.detections.empty()) {
                t.track_id = *d.track_id;
                t.class_id = d.class_id;
            } else if (t.detections.back().frame_index >= frame_index) {
                throw std::invalid_argument("StreamMonitor: track " + std::to_string(t.track_id) +
                                            " has two detections at frame " +
                                            std::to_string(frame_index));
            }
            t.detections.push_back(d);
            history_.record(*d.track_id, frame_index,
                            compute_probe_vector(d, t, image, frame_index, cfg_.window));
        }
        std::vector<DetectionVerdict> verdicts;
        verdicts.reserve(tracked.size());
        for (const Detection& d : tracked) {
            verdicts.push_back(
                evaluate_detection(axioms_, tracks_.at(*d.track_id), frame_index, history_, cfg_));
        }
        return verdicts;
    }

    const std::vector<AxiomFormula>& axioms() const { return axioms_; }
    const ProbeHistory& history() const { return history_; }
    const std::map<int, Track>& tracks() const { return tracks_; }

   private:
    std::vector<AxiomFormula> axioms_;
    MonitorConfig cfg_;
    GreedyTracker tracker_;
    std::map<int, Track> tracks_;
    ProbeHistory history_;
};

/// Run the monitor over an aligned stream of detections and images.
/// Throws when the two sequences disagree in length.
inline std::vector<std::vector<DetectionVerdict>> monitor_stream(
    const std::vector<AxiomFormula>& axioms, const std::vector<std::vector<Detection>>& frames,
    const std::vector<GrayImage>& images, const MonitorConfig& cfg = {},
    const TrackerConfig& tcfg = {}) {
    if (frames.size() != images.size()) {
        throw std::invalid_argument("monitor_stream: " + std::to_string(frames.size()) +
                                    " detection frames vs " + std::to_string(images.size()) +
                                    " images");
    }
    StreamMonitor monitor(axioms, cfg, tcfg);
    std::vector<std::vector<DetectionVerdict>> out;
    out.reserve(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
        out.push_back(monitor.step(static_cast<int>(f), images[f], frames[f]));
    }
    return out;
}

}  // namespace cogsense

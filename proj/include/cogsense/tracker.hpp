#pragma once

#include <map>
#include <tuple>
#include <vector>

#include "cogsense/core.hpp"

namespace cogsense {

struct TrackerConfig {
    double iou_gate = 0.3;
};

/// Greedy frame-to-frame box association. Matches each detection to the
/// previous frame's box of the same class with the highest IoU above the
/// gate; unmatched detections start fresh IDs. IDs are never reused and
/// there is no re-identification across gaps.
///
/// Value type: copy the tracker to checkpoint its state (the closed loop
/// rewinds one frame when re-detection replaces a frame's detections).
class GreedyTracker {
   public:
    explicit GreedyTracker(TrackerConfig cfg = {}) : cfg_(cfg) {}

    /// Assigns track ids to the frame's detections and returns them.
    /// Frames must be fed in time order.
    std::vector<Detection> advance(int frame_index, std::vector<Detection> dets) {
        struct Cand {
            double overlap;
            std::size_t prev;
            std::size_t cur;
        };
        std::vector<Cand> cands;
        for (std::size_t p = 0; p < prev_.size(); ++p) {
            for (std::size_t c = 0; c < dets.size(); ++c) {
                if (prev_[p].class_id != dets[c].class_id) {
                    continue;
                }
                const double o = iou(prev_[p].bbox, dets[c].bbox);
                if (o >= cfg_.iou_gate) {
                    cands.push_back({o, p, c});
                }
            }
        }
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            return std::tie(b.overlap, a.prev, a.cur) < std::tie(a.overlap, b.prev, b.cur);
        });
        std::vector<bool> prev_used(prev_.size(), false);
        std::vector<bool> cur_used(dets.size(), false);
        for (const Cand& c : cands) {
            if (prev_used[c.prev] || cur_used[c.cur]) {
                continue;
            }
            prev_used[c.prev] = true;
            cur_used[c.cur] = true;
            dets[c.cur].track_id = prev_[c.prev].track_id;
        }
        for (std::size_t c = 0; c < dets.size(); ++c) {
            if (!cur_used[c]) {
                dets[c].track_id = next_id_++;
            }
            dets[c].frame_index = frame_index;
        }
        prev_ = dets;
        return dets;
    }

    int next_id() const { return next_id_; }

   private:
    TrackerConfig cfg_;
    std::vector<Detection> prev_;
    int next_id_ = 0;
};

/// Group id-carrying detections into Track objects, ordered by track id.
inline std::vector<Track> tracks_from_detections(const std::vector<std::vector<Detection>>& frames) {
    std::map<int, Track> by_id;
    for (const auto& frame : frames) {
        for (const Detection& d : frame) {
            if (!d.track_id) {
                throw std::invalid_argument("tracks_from_detections: detection without track id");
            }
            Track& t = by_id[*d.track_id];
            if (t.detections.empty()) {
                t.track_id = *d.track_id;
                t.class_id = d.class_id;
            } else if (t.detections.back().frame_index >= d.frame_index) {
                throw std::invalid_argument("tracks_from_detections: frame indices not increasing");
            }
            t.detections.push_back(d);
        }
    }
    std::vector<Track> out;
    out.reserve(by_id.size());
    for (auto& [id, t] : by_id) {
        out.push_back(std::move(t));
    }
    return out;
}

/// Run the greedy tracker over a time-ordered detection stream.
inline std::vector<Track> associate_tracks(const std::vector<std::vector<Detection>>& frames,
                                           double iou_gate = 0.3) {
    GreedyTracker tracker(TrackerConfig{iou_gate});
    std::vector<std::vector<Detection>> tracked;
    tracked.reserve(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
        std::vector<Detection> dets = frames[f];
        const int frame_index = dets.empty() ? static_cast<int>(f) : dets.front().frame_index;
        tracked.push_back(tracker.advance(frame_index, std::move(dets)));
    }
    return tracks_from_detections(tracked);
}

}  // namespace cogsense

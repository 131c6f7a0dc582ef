#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cogsense {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned box in image coordinates: (x, y) is the top-left corner.
/// Width and height must be strictly positive for a valid box.
struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double right() const { return x + w; }
    double bottom() const { return y + h; }
    double area() const { return w * h; }
    Point2 center() const { return {x + w / 2.0, y + h / 2.0}; }
    bool valid() const { return w > 0.0 && h > 0.0; }
};

/// Intersection-over-union of two boxes. Zero when disjoint; exactly one
/// for identical boxes (areas use the same edge arithmetic as the
/// intersection, so the ratio cancels without rounding residue).
inline double iou(const BoundingBox& a, const BoundingBox& b) {
    if (!a.valid() || !b.valid()) {
        throw std::invalid_argument("iou: degenerate box (zero or negative extent)");
    }
    const double ix = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
    const double inter = ix * iy;
    if (inter <= 0.0) {
        return 0.0;
    }
    const double area_a = (a.right() - a.x) * (a.bottom() - a.y);
    const double area_b = (b.right() - b.x) * (b.bottom() - b.y);
    return inter / (area_a + area_b - inter);
}

/// Clamp a box to [0, width) x [0, height). Returns nullopt when nothing
/// of the box remains inside the frame.
inline std::optional<BoundingBox> clamp_to_frame(const BoundingBox& b, int width, int height) {
    const double x0 = std::max(b.x, 0.0);
    const double y0 = std::max(b.y, 0.0);
    const double x1 = std::min(b.right(), static_cast<double>(width));
    const double y1 = std::min(b.bottom(), static_cast<double>(height));
    if (x1 - x0 <= 0.0 || y1 - y0 <= 0.0) {
        return std::nullopt;
    }
    return BoundingBox{x0, y0, x1 - x0, y1 - y0};
}

/// One detector output box. track_id is assigned by the tracker (or carried
/// in from an upstream log that already has identities).
struct Detection {
    int frame_index = 0;
    BoundingBox bbox;
    int class_id = 0;
    double confidence = 0.0;  // in [0,1]
    std::optional<int> track_id;
};

/// Detections of one object identity, time-ordered, strictly increasing
/// frame indices.
struct Track {
    int track_id = 0;
    int class_id = 0;
    std::vector<Detection> detections;

    /// Detection at an exact frame, or nullptr. Binary search on frame_index.
    const Detection* at_frame(int frame_index) const {
        auto it = std::lower_bound(detections.begin(), detections.end(), frame_index,
                                   [](const Detection& d, int f) { return d.frame_index < f; });
        if (it == detections.end() || it->frame_index != frame_index) {
            return nullptr;
        }
        return &*it;
    }

    bool empty() const { return detections.empty(); }
    int first_frame() const { return detections.front().frame_index; }
    int last_frame() const { return detections.back().frame_index; }
};

}  // namespace cogsense

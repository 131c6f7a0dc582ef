#pragma once

#include <charconv>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "cogsense/core.hpp"

namespace cogsense::sim {

/// One point of the confidence-threshold sweep. fp_rate is false positives
/// per frame; tp_rate keeps the TP/(TP+FP) convention used alongside the
/// standard precision/recall pair.
struct CurvePoint {
    double threshold = 0.0;
    double precision = 1.0;
    double recall = 0.0;
    double fp_rate = 0.0;
    double tp_rate = 1.0;
};

struct MethodReport {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    double tp_rate = 1.0;  // TP / (TP + FP)
    double precision = 1.0;
    double recall = 0.0;
    std::vector<CurvePoint> curve;
    long adaptation_count = 0;

    bool operator==(const MethodReport&) const = default;
};

inline bool operator==(const CurvePoint& a, const CurvePoint& b) {
    return std::tie(a.threshold, a.precision, a.recall, a.fp_rate, a.tp_rate) ==
           std::tie(b.threshold, b.precision, b.recall, b.fp_rate, b.tp_rate);
}

struct EvalReport {
    int frame_count = 0;
    std::map<std::string, MethodReport> per_method;

    bool operator==(const EvalReport&) const = default;
};

inline std::vector<double> default_sweep() {
    std::vector<double> t;
    for (int i = 1; i <= 19; ++i) {
        t.push_back(i * 0.05);
    }
    return t;
}

namespace detail {

struct Counts {
    long tp = 0, fp = 0, fn = 0;
};

/// Greedy highest-IoU-first matching of one frame's detections (those at or
/// above min_confidence) against its ground truth.
inline Counts match_frame(const std::vector<Detection>& gt, const std::vector<Detection>& dets,
                          double iou_thresh, double min_confidence) {
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (dets[i].confidence >= min_confidence) {
            kept.push_back(i);
        }
    }
    struct Pair {
        double overlap;
        std::size_t g, d;
    };
    std::vector<Pair> pairs;
    for (std::size_t g = 0; g < gt.size(); ++g) {
        for (std::size_t k = 0; k < kept.size(); ++k) {
            if (gt[g].class_id != dets[kept[k]].class_id) {
                continue;
            }
            const double o = iou(gt[g].bbox, dets[kept[k]].bbox);
            if (o >= iou_thresh) {
                pairs.push_back({o, g, k});
            }
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        return std::tie(b.overlap, a.g, a.d) < std::tie(a.overlap, b.g, b.d);
    });
    std::vector<bool> g_used(gt.size(), false), d_used(kept.size(), false);
    Counts c;
    for (const Pair& p : pairs) {
        if (g_used[p.g] || d_used[p.d]) {
            continue;
        }
        g_used[p.g] = true;
        d_used[p.d] = true;
        ++c.tp;
    }
    c.fp = static_cast<long>(kept.size()) - c.tp;
    c.fn = static_cast<long>(gt.size()) - c.tp;
    return c;
}

inline double safe_ratio(long num, long den, double when_empty) {
    return den == 0 ? when_empty : static_cast<double>(num) / static_cast<double>(den);
}

inline std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace detail

/// TP/FP/FN counts plus precision-recall and threshold-sweep curves.
/// Headline counts use every detection (threshold 0); conventions when a
/// threshold removes all detections: precision = tp_rate = 1, recall = 0.
inline MethodReport evaluate(const std::vector<std::vector<Detection>>& gt_by_frame,
                             const std::vector<std::vector<Detection>>& det_by_frame,
                             double iou_thresh = 0.5, std::span<const double> sweep = {}) {
    if (gt_by_frame.size() != det_by_frame.size()) {
        throw std::invalid_argument("evaluate: gt and detection streams misaligned");
    }
    const auto frames = static_cast<long>(gt_by_frame.size());
    MethodReport r;

    auto totals = [&](double min_conf) {
        detail::Counts total;
        for (std::size_t f = 0; f < gt_by_frame.size(); ++f) {
            const auto c = detail::match_frame(gt_by_frame[f], det_by_frame[f], iou_thresh, min_conf);
            total.tp += c.tp;
            total.fp += c.fp;
            total.fn += c.fn;
        }
        return total;
    };

    const auto base = totals(0.0);
    r.tp = base.tp;
    r.fp = base.fp;
    r.fn = base.fn;
    r.precision = detail::safe_ratio(base.tp, base.tp + base.fp, 1.0);
    r.tp_rate = r.precision;
    r.recall = detail::safe_ratio(base.tp, base.tp + base.fn, 0.0);

    std::vector<double> thresholds(sweep.begin(), sweep.end());
    if (thresholds.empty()) {
        thresholds = default_sweep();
    }
    for (double t : thresholds) {
        const auto c = totals(t);
        CurvePoint p;
        p.threshold = t;
        p.precision = detail::safe_ratio(c.tp, c.tp + c.fp, 1.0);
        p.recall = detail::safe_ratio(c.tp, c.tp + c.fn, 0.0);
        p.fp_rate = frames == 0 ? 0.0 : static_cast<double>(c.fp) / static_cast<double>(frames);
        p.tp_rate = p.precision;
        r.curve.push_back(p);
    }
    return r;
}

/// Same evaluation with ground truth given as tracks; the detection stream
/// fixes the frame count.
inline MethodReport evaluate(const std::vector<Track>& gt_tracks,
                             const std::vector<std::vector<Detection>>& det_by_frame,
                             double iou_thresh = 0.5, std::span<const double> sweep = {}) {
    std::vector<std::vector<Detection>> gt(det_by_frame.size());
    for (const Track& t : gt_tracks) {
        for (const Detection& d : t.detections) {
            if (d.frame_index >= 0 && static_cast<std::size_t>(d.frame_index) < gt.size()) {
                gt[static_cast<std::size_t>(d.frame_index)].push_back(d);
            }
        }
    }
    return evaluate(gt, det_by_frame, iou_thresh, sweep);
}

/// CSV with the documented header, one row per swept threshold.
inline std::string curve_csv(const MethodReport& r) {
    std::string out = "threshold,precision,recall,fp_rate,tp_rate\n";
    for (const CurvePoint& p : r.curve) {
        out += detail::fmt(p.threshold) + "," + detail::fmt(p.precision) + "," +
               detail::fmt(p.recall) + "," + detail::fmt(p.fp_rate) + "," + detail::fmt(p.tp_rate) +
               "\n";
    }
    return out;
}

/// Machine-readable report; key order and float formatting are stable, so
/// identical runs serialize to identical bytes.
inline std::string report_json(const EvalReport& rep) {
    std::string out = "{\n  \"frame_count\": " + std::to_string(rep.frame_count) +
                      ",\n  \"methods\": {\n";
    bool first_m = true;
    for (const auto& [name, r] : rep.per_method) {
        if (!first_m) {
            out += ",\n";
        }
        first_m = false;
        out += "    \"" + name + "\": {\n";
        out += "      \"tp\": " + std::to_string(r.tp) + ",\n";
        out += "      \"fp\": " + std::to_string(r.fp) + ",\n";
        out += "      \"fn\": " + std::to_string(r.fn) + ",\n";
        out += "      \"tp_rate\": " + detail::fmt(r.tp_rate) + ",\n";
        out += "      \"precision\": " + detail::fmt(r.precision) + ",\n";
        out += "      \"recall\": " + detail::fmt(r.recall) + ",\n";
        out += "      \"adaptation_count\": " + std::to_string(r.adaptation_count) + ",\n";
        out += "      \"curve\": [";
        for (std::size_t i = 0; i < r.curve.size(); ++i) {
            const CurvePoint& p = r.curve[i];
            out += i == 0 ? "\n" : ",\n";
            out += "        [" + detail::fmt(p.threshold) + ", " + detail::fmt(p.precision) + ", " +
                   detail::fmt(p.recall) + ", " + detail::fmt(p.fp_rate) + ", " +
                   detail::fmt(p.tp_rate) + "]";
        }
        out += r.curve.empty() ? "]\n" : "\n      ]\n";
        out += "    }";
    }
    out += "\n  }\n}\n";
    return out;
}

/// Aligned-column summary for humans.
inline std::string report_table(const EvalReport& rep) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-10s %8s %8s %8s %9s %10s %8s %8s\n", "method", "tp", "fp",
                  "fn", "tp_rate", "precision", "recall", "adapts");
    out += line;
    for (const auto& [name, r] : rep.per_method) {
        std::snprintf(line, sizeof(line), "%-10s %8ld %8ld %8ld %9.4f %10.4f %8.4f %8ld\n",
                      name.c_str(), r.tp, r.fp, r.fn, r.tp_rate, r.precision, r.recall,
                      r.adaptation_count);
        out += line;
    }
    return out;
}

}  // namespace cogsense::sim

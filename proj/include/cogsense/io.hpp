#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cogsense/adaptation.hpp"
#include "cogsense/axiom.hpp"
#include "cogsense/calibration.hpp"
#include "cogsense/core.hpp"
#include "cogsense/monitor.hpp"
#include "cogsense/sim/closed_loop.hpp"
#include "cogsense/sim/detector.hpp"
#include "cogsense/sim/scene.hpp"

namespace cogsense::io {

using json = nlohmann::json;

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    f << contents;
    if (!f) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

// ---------------------------------------------------------------------------
// Detection logs: one JSON object per line with fields
//   frame, x, y, w, h, class, conf and optional id
// ---------------------------------------------------------------------------

inline json detection_to_json(const Detection& d) {
    json j{{"frame", d.frame_index}, {"x", d.bbox.x},          {"y", d.bbox.y},
           {"w", d.bbox.w},          {"h", d.bbox.h},          {"class", d.class_id},
           {"conf", d.confidence}};
    if (d.track_id) {
        j["id"] = *d.track_id;
    }
    return j;
}

inline std::string detections_to_jsonl(const std::vector<std::vector<Detection>>& frames) {
    std::string out;
    for (const auto& frame : frames) {
        for (const Detection& d : frame) {
            out += detection_to_json(d).dump();
            out += '\n';
        }
    }
    return out;
}

/// Parse a detection log. When frame dimensions are given, boxes are
/// clamped to them; records whose box lies entirely outside are rejected.
inline std::vector<Detection> parse_detection_log(const std::string& contents,
                                                  std::optional<int> frame_w = std::nullopt,
                                                  std::optional<int> frame_h = std::nullopt) {
    std::vector<Detection> out;
    std::istringstream in(contents);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error("detection log line " + std::to_string(line_no) + ": " +
                                     e.what());
        }
        Detection d;
        try {
            d.frame_index = j.at("frame").get<int>();
            d.bbox = {j.at("x").get<double>(), j.at("y").get<double>(), j.at("w").get<double>(),
                      j.at("h").get<double>()};
            d.class_id = j.at("class").get<int>();
            d.confidence = j.at("conf").get<double>();
            if (j.contains("id")) {
                d.track_id = j.at("id").get<int>();
            }
        } catch (const json::exception& e) {
            throw std::runtime_error("detection log line " + std::to_string(line_no) + ": " +
                                     e.what());
        }
        if (!d.bbox.valid()) {
            throw std::runtime_error("detection log line " + std::to_string(line_no) +
                                     ": box has non-positive extent");
        }
        if (d.confidence < 0.0 || d.confidence > 1.0) {
            throw std::runtime_error("detection log line " + std::to_string(line_no) +
                                     ": confidence outside [0,1]");
        }
        if (frame_w && frame_h) {
            const auto clamped = clamp_to_frame(d.bbox, *frame_w, *frame_h);
            if (!clamped) {
                throw std::runtime_error("detection log line " + std::to_string(line_no) +
                                         ": box lies outside the frame");
            }
            d.bbox = *clamped;
        }
        out.push_back(d);
    }
    return out;
}

/// Group a flat detection list by frame index; frame_count extends the
/// result to cover trailing empty frames.
inline std::vector<std::vector<Detection>> group_by_frame(const std::vector<Detection>& dets,
                                                          int frame_count = 0) {
    int max_frame = frame_count - 1;
    for (const Detection& d : dets) {
        if (d.frame_index < 0) {
            throw std::runtime_error("group_by_frame: negative frame index");
        }
        max_frame = std::max(max_frame, d.frame_index);
    }
    std::vector<std::vector<Detection>> out(static_cast<std::size_t>(max_frame + 1));
    for (const Detection& d : dets) {
        out[static_cast<std::size_t>(d.frame_index)].push_back(d);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Probe records: one JSON object per (frame, track); undefined probes are
// null. The optional label field carries the calibration ground truth.
// ---------------------------------------------------------------------------

inline json probe_to_json(int frame_index, int track_id, const ProbeVector& p,
                          std::optional<Label> label = std::nullopt) {
    auto opt = [](const std::optional<double>& v) {
        return v ? json(*v) : json(nullptr);
    };
    json j{{"frame", frame_index},
           {"track", track_id},
           {"size_px2", p.size_px2},
           {"aspect", p.aspect},
           {"confidence", p.confidence},
           {"contrast", p.contrast},
           {"entropy_bits", p.entropy_bits},
           {"loc_dev_px", opt(p.loc_dev_px)},
           {"bbox_dev_rel", opt(p.bbox_dev_rel)},
           {"id_consistency", p.id_consistency}};
    if (label) {
        j["label"] = *label == Label::true_positive ? "tp" : "fp";
    }
    return j;
}

struct ProbeRecord {
    int frame_index = 0;
    int track_id = 0;
    ProbeVector probes;
    std::optional<Label> label;
};

inline std::vector<ProbeRecord> parse_probe_log(const std::string& contents) {
    std::vector<ProbeRecord> out;
    std::istringstream in(contents);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const json j = json::parse(line);
            ProbeRecord r;
            r.frame_index = j.at("frame").get<int>();
            r.track_id = j.at("track").get<int>();
            auto opt = [&j](const char* key) -> std::optional<double> {
                if (!j.contains(key) || j.at(key).is_null()) {
                    return std::nullopt;
                }
                return j.at(key).get<double>();
            };
            r.probes.size_px2 = j.at("size_px2").get<double>();
            r.probes.aspect = j.at("aspect").get<double>();
            r.probes.confidence = j.at("confidence").get<double>();
            r.probes.contrast = j.at("contrast").get<double>();
            r.probes.entropy_bits = j.at("entropy_bits").get<double>();
            r.probes.loc_dev_px = opt("loc_dev_px");
            r.probes.bbox_dev_rel = opt("bbox_dev_rel");
            r.probes.id_consistency = j.at("id_consistency").get<double>();
            if (j.contains("label")) {
                const std::string l = j.at("label").get<std::string>();
                if (l != "tp" && l != "fp") {
                    throw std::runtime_error("label must be 'tp' or 'fp'");
                }
                r.label = l == "tp" ? Label::true_positive : Label::false_positive;
            }
            out.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw std::runtime_error("probe log line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Axiom set files: the DSL plus a JSON sidecar holding the fitted
// distribution parameters and the training targets.
// ---------------------------------------------------------------------------

inline std::filesystem::path sidecar_path(const std::filesystem::path& axioms_path) {
    return axioms_path.string() + ".meta.json";
}

inline json distribution_to_json(const ProbeDistribution& d) {
    json j{{"sample_count", d.sample_count},
           {"support_lo", d.support_lo},
           {"support_hi", d.support_hi}};
    if (const auto* g = std::get_if<GaussianModel>(&d.model)) {
        j["model"] = "gaussian";
        j["mean"] = g->mean;
        j["stddev"] = g->stddev;
    } else {
        const auto& h = std::get<HistogramModel>(d.model);
        j["model"] = "histogram";
        j["edges"] = h.edges;
        j["densities"] = h.densities;
    }
    return j;
}

inline json calibration_sidecar(const CalibrationResult& result) {
    json fits = json::object();
    for (const ProbeCalibration& f : result.fits) {
        fits[std::string(probe_name(f.probe))] = {{"tp", distribution_to_json(f.tp)},
                                                  {"fp", distribution_to_json(f.fp)}};
    }
    return json{{"targets",
                 {{"contrast", result.targets.contrast},
                  {"entropy_bits", result.targets.entropy_bits}}},
                {"fits", fits},
                {"skipped", result.skipped}};
}

inline DesiredTargets parse_targets(const json& sidecar) {
    DesiredTargets t;
    t.contrast = sidecar.at("targets").at("contrast").get<double>();
    t.entropy_bits = sidecar.at("targets").at("entropy_bits").get<double>();
    return t;
}

// ---------------------------------------------------------------------------
// Key-value config files: "key = value" lines, '#' comments. Unknown keys
// are an error so typos surface immediately.
// ---------------------------------------------------------------------------

inline std::map<std::string, std::string> parse_key_values(const std::string& contents) {
    std::map<std::string, std::string> out;
    std::istringstream in(contents);
    std::string line;
    int line_no = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        const std::string t = trim(line);
        if (t.empty()) {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": expected 'key = value'");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": empty key or value");
        }
        out[key] = value;
    }
    return out;
}

namespace detail {

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) {
            throw std::invalid_argument(v);
        }
        return d;
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "': not a number: '" + v + "'");
    }
}

inline int to_int(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) {
        throw std::runtime_error("config key '" + key + "': not an integer: '" + v + "'");
    }
    return i;
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) {
        out.push_back(tok);
    }
    return out;
}

}  // namespace detail

/// Parse "degradation = constant G | ramp G0 G1 | hold_then_ramp HOLD G0 G1".
inline std::vector<double> parse_schedule(const std::string& value, int frame_count) {
    const auto toks = detail::split_ws(value);
    if (toks.empty()) {
        throw std::runtime_error("config key 'degradation': empty value");
    }
    const std::string& kind = toks[0];
    auto want = [&](std::size_t n) {
        if (toks.size() != n + 1) {
            throw std::runtime_error("config key 'degradation': '" + kind + "' takes " +
                                     std::to_string(n) + " parameter(s)");
        }
    };
    if (kind == "constant") {
        want(1);
        return sim::constant_schedule(frame_count, detail::to_double("degradation", toks[1]));
    }
    if (kind == "ramp") {
        want(2);
        return sim::ramp_schedule(frame_count, detail::to_double("degradation", toks[1]),
                                  detail::to_double("degradation", toks[2]));
    }
    if (kind == "hold_then_ramp") {
        want(3);
        return sim::hold_then_ramp_schedule(frame_count, detail::to_int("degradation", toks[1]),
                                            detail::to_double("degradation", toks[2]),
                                            detail::to_double("degradation", toks[3]));
    }
    throw std::runtime_error("config key 'degradation': unknown schedule '" + kind + "'");
}

inline sim::SceneConfig parse_scene_config(const std::string& contents) {
    const auto kv = parse_key_values(contents);
    sim::SceneConfig cfg;
    std::string schedule;
    for (const auto& [key, value] : kv) {
        if (key == "frame_count") cfg.frame_count = detail::to_int(key, value);
        else if (key == "width") cfg.width = detail::to_int(key, value);
        else if (key == "height") cfg.height = detail::to_int(key, value);
        else if (key == "object_count") cfg.object_count = detail::to_int(key, value);
        else if (key == "object_intensity_lo") cfg.object_intensity_lo = detail::to_int(key, value);
        else if (key == "object_intensity_hi") cfg.object_intensity_hi = detail::to_int(key, value);
        else if (key == "background_intensity") cfg.background_intensity = detail::to_int(key, value);
        else if (key == "noise_std") cfg.noise_std = detail::to_double(key, value);
        else if (key == "object_size_lo") cfg.object_size_lo = detail::to_int(key, value);
        else if (key == "object_size_hi") cfg.object_size_hi = detail::to_int(key, value);
        else if (key == "speed_lo") cfg.speed_lo = detail::to_double(key, value);
        else if (key == "speed_hi") cfg.speed_hi = detail::to_double(key, value);
        else if (key == "box_margin_px") cfg.box_margin_px = detail::to_int(key, value);
        else if (key == "degradation") schedule = value;
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(detail::to_double(key, value));
        else throw std::runtime_error("scene config: unknown key '" + key + "'");
    }
    if (!schedule.empty()) {
        cfg.degradation = parse_schedule(schedule, cfg.frame_count);
    }
    return cfg;
}

inline sim::DetectorModel parse_detector_config(const std::string& contents) {
    const auto kv = parse_key_values(contents);
    sim::DetectorModel m;
    for (const auto& [key, value] : kv) {
        if (key == "contrast_midpoint") m.contrast_midpoint = detail::to_double(key, value);
        else if (key == "contrast_slope") m.contrast_slope = detail::to_double(key, value);
        else if (key == "base_fp_rate") m.base_fp_rate = detail::to_double(key, value);
        else if (key == "fp_low_contrast_boost") m.fp_low_contrast_boost = detail::to_double(key, value);
        else if (key == "bbox_jitter_std") m.bbox_jitter_std = detail::to_double(key, value);
        else if (key == "confidence_noise_std") m.confidence_noise_std = detail::to_double(key, value);
        else if (key == "fp_box_lo") m.fp_box_lo = detail::to_double(key, value);
        else if (key == "fp_box_hi") m.fp_box_hi = detail::to_double(key, value);
        else if (key == "fp_confidence_lo") m.fp_confidence_lo = detail::to_double(key, value);
        else if (key == "fp_confidence_hi") m.fp_confidence_hi = detail::to_double(key, value);
        else if (key == "seed") m.seed = static_cast<std::uint64_t>(detail::to_double(key, value));
        else throw std::runtime_error("detector config: unknown key '" + key + "'");
    }
    return m;
}

// ---------------------------------------------------------------------------
// Verdict and command logs
// ---------------------------------------------------------------------------

inline json verdict_to_json(int frame_index, const DetectionVerdict& v,
                            const std::vector<AxiomFormula>& axioms) {
    json failed = json::array();
    for (const AxiomVerdict& av : v.per_axiom) {
        if (!av.pass) {
            failed.push_back(axioms[av.axiom_index].name);
        }
    }
    return json{{"frame", frame_index},
                {"track", v.detection.track_id ? json(*v.detection.track_id) : json(nullptr)},
                {"conf", v.detection.confidence},
                {"erroneous", v.erroneous},
                {"violations", v.violation_count},
                {"failed_axioms", failed}};
}

inline json command_to_json(const sim::FiredCommand& fc, AdaptationMode mode) {
    return json{{"frame", fc.frame_index},
                {"delta_c", fc.command.delta_c},
                {"bound_b", fc.command.bound_b},
                {"i_max", fc.command.i_max},
                {"i_min", fc.command.i_min},
                {"mode", mode == AdaptationMode::full_frame ? "full_frame" : "roi_only"},
                {"flagged", fc.command.flagged_detections},
                {"detections", fc.command.source_detections}};
}

}  // namespace cogsense::io

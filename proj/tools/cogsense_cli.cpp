// Command-line front end: simulate scenes, calibrate axiom sets, monitor
// detection streams, and run the closed-loop comparison.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cogsense/cogsense.hpp"

namespace fs = std::filesystem;
using namespace cogsense;

namespace {

struct GlobalOpts {
    std::string config;
    std::string out_dir;
    std::optional<std::int64_t> seed;
    bool verbose = false;
};

void log_verbose(const GlobalOpts& g, const std::string& msg) {
    if (g.verbose) {
        std::cerr << msg << "\n";
    }
}

fs::path ensure_out_dir(const std::string& dir) {
    if (dir.empty()) {
        throw std::runtime_error("an output directory is required (--out DIR)");
    }
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

sim::SceneConfig load_scene_config(const std::string& path, std::optional<std::int64_t> seed) {
    auto cfg = io::parse_scene_config(io::read_file(path));
    if (seed) {
        cfg.seed = static_cast<std::uint64_t>(*seed);
    }
    return cfg;
}

sim::DetectorModel load_detector_config(const std::string& path, std::optional<std::int64_t> seed) {
    auto model = io::parse_detector_config(io::read_file(path));
    if (seed) {
        model.seed = static_cast<std::uint64_t>(*seed) + 0x9e3779b9;  // decorrelate from the scene
    }
    return model;
}

std::vector<AxiomFormula> load_axioms(const std::string& path) {
    const auto axioms = parse_axiom_set(io::read_file(path));
    if (axioms.empty()) {
        throw std::runtime_error("axiom file " + path + " contains no axioms");
    }
    return axioms;
}

DesiredTargets load_targets(const std::string& axioms_path) {
    const fs::path sidecar = io::sidecar_path(axioms_path);
    if (!fs::exists(sidecar)) {
        throw std::runtime_error("missing calibration sidecar " + sidecar.string() +
                                 " (produced by 'train' alongside the axiom file)");
    }
    return io::parse_targets(io::json::parse(io::read_file(sidecar)));
}

// ---------------------------------------------------------------------------

int cmd_simulate(const GlobalOpts& g) {
    if (g.config.empty()) {
        throw std::runtime_error("simulate needs --config SCENE_CFG");
    }
    const fs::path out = ensure_out_dir(g.out_dir);
    const auto cfg = load_scene_config(g.config, g.seed);
    const sim::Scene scene = sim::generate_scene(cfg);

    for (std::size_t f = 0; f < scene.frames.size(); ++f) {
        write_pgm(scene.frames[f], out / frame_filename(static_cast<int>(f)));
    }
    const auto gt = sim::detections_by_frame(scene.gt_tracks, cfg.frame_count);
    io::write_file(out / "gt.jsonl", io::detections_to_jsonl(gt));

    io::json manifest{{"frame_count", cfg.frame_count},
                      {"width", cfg.width},
                      {"height", cfg.height},
                      {"object_count", cfg.object_count},
                      {"seed", cfg.seed},
                      {"image_pattern", "frame_%06d.pgm"},
                      {"ground_truth", "gt.jsonl"}};
    io::write_file(out / "manifest.json", manifest.dump(2) + "\n");
    log_verbose(g, "wrote " + std::to_string(cfg.frame_count) + " frames to " + out.string());
    std::cout << out.string() << "\n";
    return 0;
}

int cmd_train(const GlobalOpts& g, const std::string& probes_path, const std::string& out_path,
              int window, int min_samples) {
    const auto records = io::parse_probe_log(io::read_file(probes_path));
    std::vector<LabeledSample> samples;
    for (const auto& r : records) {
        if (!r.label) {
            throw std::runtime_error("probe record at frame " + std::to_string(r.frame_index) +
                                     " has no label; train needs labeled probes");
        }
        samples.push_back({r.probes, *r.label});
    }
    if (samples.empty()) {
        throw std::runtime_error("no labeled probe records in " + probes_path);
    }
    CalibrationConfig cfg;
    cfg.window = window;
    cfg.min_samples = static_cast<std::size_t>(min_samples);
    const CalibrationResult result = calibrate(samples, cfg);

    std::string text = "# axiom set calibrated from " + probes_path + "\n";
    text += print_axiom_set(result.axioms);
    io::write_file(out_path, text);
    io::write_file(io::sidecar_path(out_path), io::calibration_sidecar(result).dump(2) + "\n");

    for (const auto& reason : result.skipped) {
        std::cerr << "skipped " << reason << "\n";
    }
    log_verbose(g, "calibrated " + std::to_string(result.axioms.size()) + " axioms");
    std::cout << out_path << "\n";
    return 0;
}

int cmd_monitor(const GlobalOpts& g, const std::string& detections_path,
                const std::string& images_dir, const std::string& axioms_path,
                const std::string& out_path, int k_min, const std::string& probe_dump) {
    const auto axioms = load_axioms(axioms_path);
    const auto flat = io::parse_detection_log(io::read_file(detections_path));
    auto frames = io::group_by_frame(flat);

    std::vector<GrayImage> images;
    images.reserve(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const fs::path img_path = fs::path(images_dir) / frame_filename(static_cast<int>(f));
        if (!fs::exists(img_path)) {
            throw std::runtime_error("missing image for frame " + std::to_string(f) + ": " +
                                     img_path.string());
        }
        images.push_back(read_pgm(img_path));
    }
    for (auto& frame : frames) {
        for (auto& d : frame) {
            const auto clamped = clamp_to_frame(d.bbox, images[0].width, images[0].height);
            if (!clamped) {
                throw std::runtime_error("detection at frame " + std::to_string(d.frame_index) +
                                         " lies outside the image");
            }
            d.bbox = *clamped;
        }
    }

    MonitorConfig cfg;
    cfg.k_min = k_min;
    int max_window = 10;
    for (const auto& a : axioms) {
        max_window = std::max(max_window, a.spec.window);
    }
    cfg.window.window = max_window;
    bool all_have_ids = !flat.empty();
    for (const auto& d : flat) {
        all_have_ids = all_have_ids && d.track_id.has_value();
    }
    cfg.use_provided_ids = all_have_ids;
    log_verbose(g, all_have_ids ? "using track ids from the log" : "running the greedy tracker");

    StreamMonitor monitor(axioms, cfg);
    std::string verdict_lines;
    std::string probe_lines;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto verdicts = monitor.step(static_cast<int>(f), images[f], frames[f]);
        for (const auto& v : verdicts) {
            verdict_lines += io::verdict_to_json(static_cast<int>(f), v, axioms).dump();
            verdict_lines += '\n';
            if (!probe_dump.empty() && v.detection.track_id) {
                const ProbeVector* p = monitor.history().at(*v.detection.track_id, static_cast<int>(f));
                if (p != nullptr) {
                    probe_lines +=
                        io::probe_to_json(static_cast<int>(f), *v.detection.track_id, *p).dump();
                    probe_lines += '\n';
                }
            }
        }
    }
    io::write_file(out_path, verdict_lines);
    if (!probe_dump.empty()) {
        io::write_file(probe_dump, probe_lines);
    }
    std::cout << out_path << "\n";
    return 0;
}

int cmd_run(const GlobalOpts& g, const std::string& detector_path, const std::string& axioms_path,
            const std::string& methods_csv, const std::string& adapt_mode,
            const std::string& probe_dump, int k_min, double min_delta) {
    if (g.config.empty()) {
        throw std::runtime_error("run needs --config SCENE_CFG");
    }
    if (detector_path.empty()) {
        throw std::runtime_error("run needs --detector DETECTOR_CFG");
    }
    const fs::path out = ensure_out_dir(g.out_dir);
    const auto scene_cfg = load_scene_config(g.config, g.seed);
    const auto model = load_detector_config(detector_path, g.seed);

    std::vector<sim::Method> methods;
    {
        std::istringstream in(methods_csv);
        std::string tok;
        while (std::getline(in, tok, ',')) {
            const auto m = sim::method_from_name(tok);
            if (!m) {
                throw std::runtime_error("unknown method '" + tok +
                                         "' (expected baseline, hist_eq or cogsense)");
            }
            methods.push_back(*m);
        }
    }
    if (methods.empty()) {
        throw std::runtime_error("no methods requested");
    }

    const bool wants_cogsense =
        std::find(methods.begin(), methods.end(), sim::Method::cogsense) != methods.end();
    std::vector<AxiomFormula> axioms;
    DesiredTargets targets;
    if (wants_cogsense) {
        if (axioms_path.empty()) {
            throw std::runtime_error("method 'cogsense' needs --axioms FILE");
        }
        axioms = load_axioms(axioms_path);
        targets = load_targets(axioms_path);
    }

    sim::LoopConfig loop;
    loop.monitor.k_min = k_min;
    int max_window = 10;
    for (const auto& a : axioms) {
        max_window = std::max(max_window, a.spec.window);
    }
    loop.monitor.window.window = max_window;
    loop.adaptation.min_actionable_delta = min_delta;
    if (adapt_mode == "roi") {
        loop.adaptation.mode = AdaptationMode::roi_only;
    } else if (adapt_mode != "full") {
        throw std::runtime_error("--adapt-mode must be 'full' or 'roi'");
    }

    sim::LoopArtifacts artifacts;
    const sim::EvalReport report =
        sim::run_closed_loop(scene_cfg, model, axioms, targets, methods, loop, &artifacts);

    io::write_file(out / "report.json", sim::report_json(report));
    io::write_file(out / "report.txt", sim::report_table(report));
    for (const auto& [name, rep] : report.per_method) {
        io::write_file(out / ("curve_" + name + ".csv"), sim::curve_csv(rep));
    }
    {
        std::string lines;
        for (const auto& fc : artifacts.commands) {
            lines += io::command_to_json(fc, loop.adaptation.mode).dump();
            lines += '\n';
        }
        io::write_file(out / "commands.jsonl", lines);
    }
    if (!probe_dump.empty()) {
        // labeled probes from a plain baseline pass over the same scene
        const sim::Scene scene = sim::generate_scene(scene_cfg);
        const auto dets =
            sim::detect_stream(scene, model, [](const GrayImage& img) { return img; });
        const auto records = sim::collect_labeled_probes(scene, dets, loop.monitor.window,
                                                         loop.tracker, loop.iou_thresh);
        std::string lines;
        for (const auto& r : records) {
            lines += io::probe_to_json(r.frame_index, r.track_id, r.sample.probes, r.sample.label)
                         .dump();
            lines += '\n';
        }
        io::write_file(out / probe_dump, lines);
    }

    std::cout << sim::report_table(report);
    log_verbose(g, "report written to " + (out / "report.json").string());
    return 0;
}

int cmd_eval(const GlobalOpts& g, const std::string& gt_path, const std::string& detections_path) {
    const fs::path out = ensure_out_dir(g.out_dir);
    const auto gt_flat = io::parse_detection_log(io::read_file(gt_path));
    const auto det_flat = io::parse_detection_log(io::read_file(detections_path));
    const int frames = static_cast<int>(std::max(io::group_by_frame(gt_flat).size(),
                                                 io::group_by_frame(det_flat).size()));
    const auto gt = io::group_by_frame(gt_flat, frames);
    const auto dets = io::group_by_frame(det_flat, frames);

    sim::EvalReport report;
    report.frame_count = frames;
    report.per_method["detections"] = sim::evaluate(gt, dets);
    io::write_file(out / "report.json", sim::report_json(report));
    io::write_file(out / "report.txt", sim::report_table(report));
    io::write_file(out / "curve_detections.csv", sim::curve_csv(report.per_method["detections"]));
    std::cout << sim::report_table(report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"perception error detection and contrast adaptation toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config, "primary config file for the subcommand");
    app.add_option("--seed", g.seed, "override the config seed");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_flag("--verbose", g.verbose, "chatty progress on stderr");

    auto* simulate = app.add_subcommand("simulate", "render a synthetic scene to PGM frames + gt");

    std::string probes_path, train_out = "axioms.pstl";
    int train_window = 10, train_min_samples = 30;
    auto* train = app.add_subcommand("train", "calibrate an axiom set from labeled probes");
    train->add_option("--probes", probes_path, "labeled probe JSONL")->required();
    train->add_option("--axioms-out", train_out, "output axiom file");
    train->add_option("--window", train_window, "window length M for emitted axioms");
    train->add_option("--min-samples", train_min_samples, "minimum samples per side per probe");

    std::string mon_dets, mon_images, mon_axioms, mon_out = "verdicts.jsonl", mon_probe_dump;
    int mon_kmin = 1;
    auto* monitor = app.add_subcommand("monitor", "evaluate axioms over a detection stream");
    monitor->add_option("--detections", mon_dets, "detection JSONL")->required();
    monitor->add_option("--images", mon_images, "directory of frame_%06d.pgm")->required();
    monitor->add_option("--axioms", mon_axioms, "axiom DSL file")->required();
    monitor->add_option("--verdicts-out", mon_out, "output verdict JSONL");
    monitor->add_option("--k-min", mon_kmin, "axiom failures needed to flag a detection");
    monitor->add_option("--dump-probes", mon_probe_dump, "also write per-detection probes");

    std::string run_detector, run_axioms, run_methods = "baseline,hist_eq,cogsense";
    std::string run_mode = "full", run_probe_dump;
    int run_kmin = 1;
    double run_min_delta = 0.02;
    auto* run = app.add_subcommand("run", "closed-loop comparison on a synthetic scene");
    run->add_option("--detector", run_detector, "detector model config")->required();
    run->add_option("--axioms", run_axioms, "axiom DSL file (needed by cogsense)");
    run->add_option("--methods", run_methods, "comma list: baseline,hist_eq,cogsense");
    run->add_option("--adapt-mode", run_mode, "full (whole frame) or roi (boxes only)");
    run->add_option("--dump-probes", run_probe_dump, "write labeled probes (filename in --out)");
    run->add_option("--k-min", run_kmin, "axiom failures needed to flag a detection");
    run->add_option("--min-delta", run_min_delta, "smallest contrast correction worth applying");

    std::string eval_gt, eval_dets;
    auto* eval = app.add_subcommand("eval", "score a detection log against ground truth");
    eval->add_option("--gt", eval_gt, "ground-truth JSONL")->required();
    eval->add_option("--detections", eval_dets, "detection JSONL")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            return cmd_simulate(g);
        }
        if (train->parsed()) {
            return cmd_train(g, probes_path, train_out, train_window, train_min_samples);
        }
        if (monitor->parsed()) {
            return cmd_monitor(g, mon_dets, mon_images, mon_axioms, mon_out, mon_kmin,
                               mon_probe_dump);
        }
        if (run->parsed()) {
            return cmd_run(g, run_detector, run_axioms, run_methods, run_mode, run_probe_dump,
                           run_kmin, run_min_delta);
        }
        if (eval->parsed()) {
            return cmd_eval(g, eval_gt, eval_dets);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

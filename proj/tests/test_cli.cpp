#include <catch2/catch.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "cogsense/cogsense.hpp"

namespace fs = std::filesystem;
using namespace cogsense;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("cogsense_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(COGSENSE_CLI_PATH) + " " + args + " 2>/dev/null";
    return std::system(cmd.c_str());
}

std::string file_bytes(const fs::path& p) { return io::read_file(p); }

void write_scene_cfg(const fs::path& p, int frames, const std::string& degradation,
                     int seed) {
    std::ofstream f(p);
    f << "frame_count = " << frames << "\n"
      << "width = 200\nheight = 150\nobject_count = 2\n"
      << "object_intensity_lo = 180\nobject_intensity_hi = 220\n"
      << "background_intensity = 80\nnoise_std = 2.0\n"
      << "degradation = " << degradation << "\n"
      << "seed = " << seed << "\n";
}

void write_detector_cfg(const fs::path& p, double fp_rate) {
    std::ofstream f(p);
    f << "contrast_midpoint = 0.33\ncontrast_slope = 0.035\n"
      << "base_fp_rate = " << fp_rate << "\nfp_low_contrast_boost = 3.0\n"
      << "bbox_jitter_std = 0.4\nconfidence_noise_std = 0.02\nseed = 77\n";
}

}  // namespace

TEST_CASE("simulate writes frames, ground truth and a manifest") {
    TempDir tmp;
    const auto cfg = tmp.path / "scene.cfg";
    write_scene_cfg(cfg, 5, "constant 1.0", 42);

    REQUIRE(run_cli("--config " + cfg.string() + " --out " + (tmp.path / "a").string() +
                    " simulate") == 0);
    for (int f = 0; f < 5; ++f) {
        CHECK(fs::exists(tmp.path / "a" / frame_filename(f)));
    }
    CHECK(fs::exists(tmp.path / "a" / "gt.jsonl"));
    CHECK(fs::exists(tmp.path / "a" / "manifest.json"));

    // determinism: a second run produces identical bytes
    REQUIRE(run_cli("--config " + cfg.string() + " --out " + (tmp.path / "b").string() +
                    " simulate") == 0);
    CHECK(file_bytes(tmp.path / "a" / frame_filename(3)) ==
          file_bytes(tmp.path / "b" / frame_filename(3)));
    CHECK(file_bytes(tmp.path / "a" / "gt.jsonl") == file_bytes(tmp.path / "b" / "gt.jsonl"));
}

TEST_CASE("malformed configs fail with a nonzero exit") {
    TempDir tmp;
    const auto cfg = tmp.path / "scene.cfg";
    io::write_file(cfg, "frame_cnt = 5\n");
    CHECK(run_cli("--config " + cfg.string() + " --out " + (tmp.path / "o").string() +
                  " simulate") != 0);
    CHECK(run_cli("train --probes " + (tmp.path / "missing.jsonl").string()) != 0);
}

TEST_CASE("the full pipeline runs end to end through the CLI") {
    TempDir tmp;
    const auto scene_cfg = tmp.path / "scene.cfg";
    const auto ramp_cfg = tmp.path / "ramp.cfg";
    const auto det_cfg = tmp.path / "detector.cfg";
    write_scene_cfg(scene_cfg, 160, "constant 1.0", 1001);
    write_scene_cfg(ramp_cfg, 160, "hold_then_ramp 80 1.0 0.4", 3003);
    write_detector_cfg(det_cfg, 0.6);

    // 1. training pass: baseline run with labeled probe dump
    REQUIRE(run_cli("--config " + scene_cfg.string() + " --out " + (tmp.path / "train").string() +
                    " run --detector " + det_cfg.string() +
                    " --methods baseline --dump-probes probes.jsonl") == 0);
    const auto probes = tmp.path / "train" / "probes.jsonl";
    REQUIRE(fs::exists(probes));

    // 2. calibrate axioms
    const auto axioms = tmp.path / "axioms.pstl";
    REQUIRE(run_cli("train --probes " + probes.string() + " --axioms-out " + axioms.string()) ==
            0);
    REQUIRE(fs::exists(axioms));
    REQUIRE(fs::exists(io::sidecar_path(axioms)));
    // the emitted file parses back
    const auto parsed = parse_axiom_set(io::read_file(axioms));
    CHECK_FALSE(parsed.empty());

    // 3. closed-loop comparison on the ramp scene
    REQUIRE(run_cli("--config " + ramp_cfg.string() + " --out " + (tmp.path / "runA").string() +
                    " run --detector " + det_cfg.string() +
                    " --methods baseline,hist_eq,cogsense --axioms " + axioms.string()) == 0);
    REQUIRE(fs::exists(tmp.path / "runA" / "report.json"));
    REQUIRE(fs::exists(tmp.path / "runA" / "report.txt"));
    REQUIRE(fs::exists(tmp.path / "runA" / "curve_baseline.csv"));
    REQUIRE(fs::exists(tmp.path / "runA" / "curve_cogsense.csv"));
    REQUIRE(fs::exists(tmp.path / "runA" / "commands.jsonl"));
    const std::string csv = file_bytes(tmp.path / "runA" / "curve_cogsense.csv");
    CHECK(csv.rfind("threshold,precision,recall,fp_rate,tp_rate\n", 0) == 0);

    // 4. idempotence: identical reports on a re-run
    REQUIRE(run_cli("--config " + ramp_cfg.string() + " --out " + (tmp.path / "runB").string() +
                    " run --detector " + det_cfg.string() +
                    " --methods baseline,hist_eq,cogsense --axioms " + axioms.string()) == 0);
    CHECK(file_bytes(tmp.path / "runA" / "report.json") ==
          file_bytes(tmp.path / "runB" / "report.json"));
    CHECK(file_bytes(tmp.path / "runA" / "commands.jsonl") ==
          file_bytes(tmp.path / "runB" / "commands.jsonl"));

    // 5. monitor the simulated stream against the axioms
    REQUIRE(run_cli("--config " + scene_cfg.string() + " --out " + (tmp.path / "sim").string() +
                    " simulate") == 0);
    REQUIRE(run_cli("monitor --detections " + (tmp.path / "sim" / "gt.jsonl").string() +
                    " --images " + (tmp.path / "sim").string() + " --axioms " + axioms.string() +
                    " --verdicts-out " + (tmp.path / "verdicts.jsonl").string() +
                    " --dump-probes " + (tmp.path / "probes_dump.jsonl").string()) == 0);
    REQUIRE(fs::exists(tmp.path / "verdicts.jsonl"));
    REQUIRE(fs::exists(tmp.path / "probes_dump.jsonl"));
    const auto dumped = io::parse_probe_log(file_bytes(tmp.path / "probes_dump.jsonl"));
    REQUIRE_FALSE(dumped.empty());
    CHECK_FALSE(dumped.front().label.has_value());  // monitor has no ground truth

    // 6. standalone eval of a detection log
    REQUIRE(run_cli("--out " + (tmp.path / "eval").string() + " eval --gt " +
                    (tmp.path / "sim" / "gt.jsonl").string() + " --detections " +
                    (tmp.path / "sim" / "gt.jsonl").string()) == 0);
    const std::string table = file_bytes(tmp.path / "eval" / "report.txt");
    CHECK(table.find("detections") != std::string::npos);
}

TEST_CASE("monitor names the missing image frame") {
    TempDir tmp;
    const auto scene_cfg = tmp.path / "scene.cfg";
    write_scene_cfg(scene_cfg, 3, "constant 1.0", 5);
    REQUIRE(run_cli("--config " + scene_cfg.string() + " --out " + (tmp.path / "sim").string() +
                    " simulate") == 0);
    fs::remove(tmp.path / "sim" / frame_filename(1));

    const auto axioms = tmp.path / "axioms.pstl";
    io::write_file(axioms, "axiom c: Pr(0.2 <= contrast <= 0.9, window=5) >= 0.8\n");
    CHECK(run_cli("monitor --detections " + (tmp.path / "sim" / "gt.jsonl").string() +
                  " --images " + (tmp.path / "sim").string() + " --axioms " + axioms.string() +
                  " --verdicts-out " + (tmp.path / "v.jsonl").string()) != 0);
}

#include <catch2/catch.hpp>

#include <cstdio>
#include <filesystem>
#include <random>

#include "cogsense/image.hpp"
#include "cogsense/io.hpp"

using namespace cogsense;

namespace {

GrayImage ramp_image(int w, int h) {
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            img.set(x, y, static_cast<std::uint8_t>((y * w + x) % 256));
        }
    }
    return img;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("cogsense_test_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("crop of the full image is the identity") {
    const GrayImage img = ramp_image(6, 5);
    const GrayImage c = crop(img, {0, 0, 6, 5});
    CHECK(c == img);
}

TEST_CASE("1x1 crop picks the single pixel") {
    const GrayImage img = ramp_image(6, 5);
    const GrayImage c = crop(img, {3, 2, 1, 1});
    REQUIRE(c.size() == 1);
    CHECK(c.pixels[0] == img.at(3, 2));
}

TEST_CASE("2x2 crop of a 4x4 ramp picks the right cells") {
    const GrayImage img = ramp_image(4, 4);  // values 0..15, row-major
    const GrayImage c = crop(img, {1, 2, 2, 2});
    REQUIRE(c.width == 2);
    REQUIRE(c.height == 2);
    CHECK(c.at(0, 0) == 9);
    CHECK(c.at(1, 0) == 10);
    CHECK(c.at(0, 1) == 13);
    CHECK(c.at(1, 1) == 14);
}

TEST_CASE("crop outside the image is an error") {
    const GrayImage img = ramp_image(4, 4);
    CHECK_THROWS_AS(crop(img, {10, 10, 2, 2}), std::out_of_range);
    CHECK_THROWS_AS(crop(img, {0, 0, 0, 2}), std::invalid_argument);
}

TEST_CASE("fractional boxes crop the outer pixel rectangle") {
    const GrayImage img = ramp_image(8, 8);
    const GrayImage c = crop(img, {1.4, 2.6, 2.0, 2.0});
    // floor(1.4)=1 .. ceil(3.4)=4, floor(2.6)=2 .. ceil(4.6)=5
    CHECK(c.width == 3);
    CHECK(c.height == 3);
    CHECK(c.at(0, 0) == img.at(1, 2));
}

TEST_CASE("PGM round trip preserves bytes") {
    TempDir tmp;
    const GrayImage img = ramp_image(33, 17);
    const auto path = tmp.path / frame_filename(3);
    write_pgm(img, path);
    CHECK(path.filename().string() == "frame_000003.pgm");
    const GrayImage back = read_pgm(path);
    CHECK(back == img);
}

TEST_CASE("PGM reader rejects other formats") {
    TempDir tmp;
    const auto path = tmp.path / "bad.pgm";
    io::write_file(path, "P2\n2 2\n255\n0 1 2 3\n");
    CHECK_THROWS_WITH(read_pgm(path), Catch::Contains("P5"));
}

TEST_CASE("histogram equalization spreads a compressed range") {
    GrayImage img(16, 16);
    std::mt19937 rng(1);
    std::uniform_int_distribution<int> v(100, 140);
    for (auto& p : img.pixels) {
        p = static_cast<std::uint8_t>(v(rng));
    }
    const GrayImage eq = equalize_histogram(img);
    const auto [lo_in, hi_in] = intensity_range(img);
    const auto [lo_out, hi_out] = intensity_range(eq);
    CHECK(hi_in - lo_in <= 40);
    CHECK(hi_out - lo_out > 200);  // stretched toward the full range
    // remap is monotone: pixel order is preserved
    for (std::size_t i = 1; i < img.pixels.size(); ++i) {
        if (img.pixels[i] > img.pixels[0]) {
            CHECK(eq.pixels[i] >= eq.pixels[0]);
        }
    }
}

TEST_CASE("histogram equalization keeps a flat image unchanged") {
    const GrayImage img(8, 8, 77);
    CHECK(equalize_histogram(img) == img);
}

TEST_CASE("detection log round trip") {
    std::vector<std::vector<Detection>> frames(2);
    Detection d;
    d.frame_index = 0;
    d.bbox = {1.5, 2.25, 10, 12};
    d.class_id = 0;
    d.confidence = 0.75;
    frames[0].push_back(d);
    d.frame_index = 1;
    d.track_id = 4;
    frames[1].push_back(d);

    const std::string text = io::detections_to_jsonl(frames);
    const auto parsed = io::parse_detection_log(text);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].frame_index == 0);
    CHECK(parsed[0].bbox.x == 1.5);
    CHECK_FALSE(parsed[0].track_id);
    REQUIRE(parsed[1].track_id);
    CHECK(*parsed[1].track_id == 4);
}

TEST_CASE("detection log ingestion clamps to the frame and rejects garbage") {
    const std::string ok =
        R"({"frame":0,"x":-5,"y":2,"w":10,"h":10,"class":0,"conf":0.5})" "\n";
    const auto parsed = io::parse_detection_log(ok, 100, 100);
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].bbox.x == 0.0);
    CHECK(parsed[0].bbox.w == Approx(5.0));

    CHECK_THROWS_WITH(io::parse_detection_log("{not json}\n"), Catch::Contains("line 1"));
    const std::string out_of_frame =
        R"({"frame":0,"x":500,"y":2,"w":10,"h":10,"class":0,"conf":0.5})" "\n";
    CHECK_THROWS_WITH(io::parse_detection_log(out_of_frame, 100, 100),
                      Catch::Contains("outside"));
    const std::string bad_conf =
        R"({"frame":0,"x":5,"y":2,"w":10,"h":10,"class":0,"conf":1.5})" "\n";
    CHECK_THROWS_WITH(io::parse_detection_log(bad_conf), Catch::Contains("confidence"));
}

TEST_CASE("probe records round trip with undefined markers and labels") {
    ProbeVector p;
    p.size_px2 = 200;
    p.aspect = 0.5;
    p.confidence = 0.9;
    p.contrast = 0.4;
    p.entropy_bits = 3.5;
    p.loc_dev_px = std::nullopt;  // undefined
    p.bbox_dev_rel = 0.125;
    p.id_consistency = 0.7;

    const std::string line = io::probe_to_json(5, 2, p, Label::true_positive).dump() + "\n" +
                             io::probe_to_json(6, 2, p).dump() + "\n";
    const auto records = io::parse_probe_log(line);
    REQUIRE(records.size() == 2);
    CHECK(records[0].frame_index == 5);
    CHECK(records[0].track_id == 2);
    CHECK_FALSE(records[0].probes.loc_dev_px.has_value());
    REQUIRE(records[0].probes.bbox_dev_rel.has_value());
    CHECK(*records[0].probes.bbox_dev_rel == 0.125);
    REQUIRE(records[0].label.has_value());
    CHECK(*records[0].label == Label::true_positive);
    CHECK_FALSE(records[1].label.has_value());
}

TEST_CASE("key-value configs parse and reject unknown keys") {
    const std::string text =
        "frame_count = 20\n"
        "# comment line\n"
        "noise_std = 1.5   # trailing comment\n"
        "degradation = ramp 1.0 0.4\n";
    const auto cfg = io::parse_scene_config(text);
    CHECK(cfg.frame_count == 20);
    CHECK(cfg.noise_std == 1.5);
    REQUIRE(cfg.degradation.size() == 20);
    CHECK(cfg.degradation.front() == Approx(1.0));
    CHECK(cfg.degradation.back() == Approx(0.4));

    CHECK_THROWS_WITH(io::parse_scene_config("frame_ct = 20\n"), Catch::Contains("frame_ct"));
    CHECK_THROWS_WITH(io::parse_scene_config("noise_std = abc\n"), Catch::Contains("noise_std"));
}

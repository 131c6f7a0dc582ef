#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "cogsense/core.hpp"
#include "cogsense/image.hpp"
#include "cogsense/sim/random.hpp"

namespace cogsense::sim {

/// Synthetic world: bright rectangles moving over a flat background.
/// The per-frame degradation gain scales the object/background intensity
/// difference, emulating contrast loss; gain 1.0 is pristine. Identical
/// config and seed produce bit-identical frames.
struct SceneConfig {
    int frame_count = 300;
    int width = 320;
    int height = 240;
    int object_count = 3;
    int object_intensity_lo = 170;
    int object_intensity_hi = 230;
    int background_intensity = 80;
    double noise_std = 2.0;
    int object_size_lo = 16;  // object edge lengths, pixels
    int object_size_hi = 36;
    double speed_lo = 0.5;  // pixels/frame
    double speed_hi = 2.0;
    /// Ground-truth boxes extend this margin past the object so a box crop
    /// sees both object and background (a tight crop of a flat rectangle
    /// would have no contrast to measure).
    int box_margin_px = 2;
    /// Per-frame contrast gain in (0, 1]. Empty means 1.0 everywhere; a
    /// shorter schedule holds its last value.
    std::vector<double> degradation;
    std::uint64_t seed = 1;
};

struct Scene {
    std::vector<GrayImage> frames;
    std::vector<Track> gt_tracks;
};

inline std::vector<double> constant_schedule(int frames, double gain) {
    return std::vector<double>(static_cast<std::size_t>(frames), gain);
}

inline std::vector<double> ramp_schedule(int frames, double from, double to) {
    std::vector<double> g(static_cast<std::size_t>(frames));
    for (int t = 0; t < frames; ++t) {
        const double a = frames > 1 ? static_cast<double>(t) / (frames - 1) : 0.0;
        g[static_cast<std::size_t>(t)] = from + (to - from) * a;
    }
    return g;
}

/// Hold `from` for `hold` frames, then ramp linearly to `to` by the last frame.
inline std::vector<double> hold_then_ramp_schedule(int frames, int hold, double from, double to) {
    std::vector<double> g(static_cast<std::size_t>(frames), from);
    const int ramp_len = frames - hold;
    for (int t = hold; t < frames; ++t) {
        const double a = ramp_len > 1 ? static_cast<double>(t - hold) / (ramp_len - 1) : 1.0;
        g[static_cast<std::size_t>(t)] = from + (to - from) * a;
    }
    return g;
}

namespace detail {

struct MovingRect {
    double x, y;    // top-left, continuous
    double vx, vy;  // pixels/frame
    int w, h;
    int intensity;
};

}  // namespace detail

/// Render the scene. Objects follow constant-velocity paths and reflect
/// their velocity at the frame edges; gaussian noise is added per pixel and
/// clipped to [0, 255]. Ground-truth boxes are exact (object rect plus the
/// configured margin, clamped to the frame).
inline Scene generate_scene(const SceneConfig& cfg) {
    if (cfg.frame_count <= 0 || cfg.width <= 0 || cfg.height <= 0 || cfg.object_count < 0) {
        throw std::invalid_argument("generate_scene: invalid scene dimensions");
    }
    Rng rng(cfg.seed);

    std::vector<detail::MovingRect> objects;
    objects.reserve(static_cast<std::size_t>(cfg.object_count));
    for (int i = 0; i < cfg.object_count; ++i) {
        detail::MovingRect o;
        o.w = rng.uniform_int(cfg.object_size_lo, cfg.object_size_hi);
        o.h = rng.uniform_int(cfg.object_size_lo, cfg.object_size_hi);
        o.x = rng.uniform(0.0, static_cast<double>(cfg.width - o.w));
        o.y = rng.uniform(0.0, static_cast<double>(cfg.height - o.h));
        const double speed = rng.uniform(cfg.speed_lo, cfg.speed_hi);
        const double heading = rng.uniform(0.0, 2.0 * M_PI);
        o.vx = speed * std::cos(heading);
        o.vy = speed * std::sin(heading);
        o.intensity = rng.uniform_int(cfg.object_intensity_lo, cfg.object_intensity_hi);
        objects.push_back(o);
    }

    Scene scene;
    scene.frames.reserve(static_cast<std::size_t>(cfg.frame_count));
    scene.gt_tracks.resize(static_cast<std::size_t>(cfg.object_count));
    for (int i = 0; i < cfg.object_count; ++i) {
        scene.gt_tracks[static_cast<std::size_t>(i)].track_id = i;
        scene.gt_tracks[static_cast<std::size_t>(i)].class_id = 0;
    }

    for (int t = 0; t < cfg.frame_count; ++t) {
        double gain = 1.0;
        if (!cfg.degradation.empty()) {
            const std::size_t idx =
                std::min(static_cast<std::size_t>(t), cfg.degradation.size() - 1);
            gain = cfg.degradation[idx];
        }
        GrayImage frame(cfg.width, cfg.height, static_cast<std::uint8_t>(cfg.background_intensity));

        for (int i = 0; i < cfg.object_count; ++i) {
            auto& o = objects[static_cast<std::size_t>(i)];
            const double level =
                cfg.background_intensity + (o.intensity - cfg.background_intensity) * gain;
            const auto value = static_cast<std::uint8_t>(std::clamp(level + 0.5, 0.0, 255.0));
            const int ox = static_cast<int>(std::lround(o.x));
            const int oy = static_cast<int>(std::lround(o.y));
            for (int y = std::max(0, oy); y < std::min(cfg.height, oy + o.h); ++y) {
                for (int x = std::max(0, ox); x < std::min(cfg.width, ox + o.w); ++x) {
                    frame.set(x, y, value);
                }
            }

            BoundingBox gt{static_cast<double>(ox - cfg.box_margin_px),
                           static_cast<double>(oy - cfg.box_margin_px),
                           static_cast<double>(o.w + 2 * cfg.box_margin_px),
                           static_cast<double>(o.h + 2 * cfg.box_margin_px)};
            const auto clamped = clamp_to_frame(gt, cfg.width, cfg.height);
            Detection d;
            d.frame_index = t;
            d.bbox = clamped.value_or(gt);
            d.class_id = 0;
            d.confidence = 1.0;
            d.track_id = i;
            scene.gt_tracks[static_cast<std::size_t>(i)].detections.push_back(d);

            // advance and bounce off the frame edges
            o.x += o.vx;
            o.y += o.vy;
            if (o.x < 0.0) {
                o.x = -o.x;
                o.vx = -o.vx;
            }
            if (o.x > cfg.width - o.w) {
                o.x = 2.0 * (cfg.width - o.w) - o.x;
                o.vx = -o.vx;
            }
            if (o.y < 0.0) {
                o.y = -o.y;
                o.vy = -o.vy;
            }
            if (o.y > cfg.height - o.h) {
                o.y = 2.0 * (cfg.height - o.h) - o.y;
                o.vy = -o.vy;
            }
        }

        if (cfg.noise_std > 0.0) {
            for (auto& v : frame.pixels) {
                const double noisy = v + rng.normal(0.0, cfg.noise_std);
                v = static_cast<std::uint8_t>(std::clamp(noisy + 0.5, 0.0, 255.0));
            }
        }
        scene.frames.push_back(std::move(frame));
    }
    return scene;
}

/// Ground truth regrouped per frame (index == frame).
inline std::vector<std::vector<Detection>> detections_by_frame(const std::vector<Track>& tracks,
                                                               int frame_count) {
    std::vector<std::vector<Detection>> out(static_cast<std::size_t>(frame_count));
    for (const Track& t : tracks) {
        for (const Detection& d : t.detections) {
            if (d.frame_index >= 0 && d.frame_index < frame_count) {
                out[static_cast<std::size_t>(d.frame_index)].push_back(d);
            }
        }
    }
    return out;
}

}  // namespace cogsense::sim

#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "cogsense/core.hpp"

namespace cogsense {

/// 8-bit grayscale image, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
        if (w <= 0 || h <= 0) {
            throw std::invalid_argument("GrayImage: non-positive dimensions");
        }
    }

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    void set(int x, int y, std::uint8_t v) { pixels[static_cast<std::size_t>(y) * width + x] = v; }
    std::size_t size() const { return pixels.size(); }
    bool empty() const { return pixels.empty(); }

    bool operator==(const GrayImage& o) const {
        return width == o.width && height == o.height && pixels == o.pixels;
    }
};

/// Integer pixel rectangle covered by a (possibly fractional) box.
/// Outer-rounded: floor on the near edges, ceil on the far edges.
struct PixelRect {
    int x0, y0, x1, y1;  // half-open [x0,x1) x [y0,y1)
    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
};

inline PixelRect pixel_rect(const BoundingBox& box, int img_w, int img_h) {
    PixelRect r{static_cast<int>(std::floor(box.x)), static_cast<int>(std::floor(box.y)),
                static_cast<int>(std::ceil(box.right())), static_cast<int>(std::ceil(box.bottom()))};
    r.x0 = std::max(r.x0, 0);
    r.y0 = std::max(r.y0, 0);
    r.x1 = std::min(r.x1, img_w);
    r.y1 = std::min(r.y1, img_h);
    return r;
}

/// Sub-image of exactly the pixels covered by the box. The box must overlap
/// the image; callers are expected to have clamped boxes on ingestion.
inline GrayImage crop(const GrayImage& img, const BoundingBox& box) {
    if (!box.valid()) {
        throw std::invalid_argument("crop: degenerate box");
    }
    const PixelRect r = pixel_rect(box, img.width, img.height);
    if (r.width() <= 0 || r.height() <= 0) {
        throw std::out_of_range("crop: box lies outside the image");
    }
    GrayImage out(r.width(), r.height());
    for (int y = r.y0; y < r.y1; ++y) {
        const std::uint8_t* src = img.pixels.data() + static_cast<std::size_t>(y) * img.width + r.x0;
        std::uint8_t* dst = out.pixels.data() + static_cast<std::size_t>(y - r.y0) * out.width;
        std::copy(src, src + r.width(), dst);
    }
    return out;
}

/// Min and max intensity of an image.
inline std::pair<std::uint8_t, std::uint8_t> intensity_range(const GrayImage& img) {
    if (img.empty()) {
        throw std::invalid_argument("intensity_range: empty image");
    }
    auto [lo, hi] = std::minmax_element(img.pixels.begin(), img.pixels.end());
    return {*lo, *hi};
}

/// Classic global histogram equalization (CDF remap to [0,255]).
inline GrayImage equalize_histogram(const GrayImage& img) {
    if (img.empty()) {
        return img;
    }
    std::array<std::size_t, 256> hist{};
    for (std::uint8_t v : img.pixels) {
        ++hist[v];
    }
    std::array<std::size_t, 256> cdf{};
    std::size_t run = 0;
    std::size_t cdf_min = 0;
    bool seen = false;
    for (int i = 0; i < 256; ++i) {
        run += hist[i];
        cdf[i] = run;
        if (!seen && hist[i] > 0) {
            cdf_min = run;
            seen = true;
        }
    }
    const std::size_t total = img.size();
    std::array<std::uint8_t, 256> lut{};
    if (total == cdf_min) {
        // single-intensity image: identity
        for (int i = 0; i < 256; ++i) {
            lut[i] = static_cast<std::uint8_t>(i);
        }
    } else {
        const double denom = static_cast<double>(total - cdf_min);
        for (int i = 0; i < 256; ++i) {
            const double v = cdf[i] < cdf_min ? 0.0
                                              : 255.0 * static_cast<double>(cdf[i] - cdf_min) / denom;
            lut[i] = static_cast<std::uint8_t>(v + 0.5);
        }
    }
    GrayImage out = img;
    for (auto& v : out.pixels) {
        v = lut[v];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Binary PGM (magic "P5", maxval 255)
// ---------------------------------------------------------------------------

inline void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("write_pgm: cannot open " + path.string());
    }
    f << "P5\n" << img.width << " " << img.height << "\n255\n";
    f.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (!f) {
        throw std::runtime_error("write_pgm: write failed for " + path.string());
    }
}

inline GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("read_pgm: cannot open " + path.string());
    }
    std::string magic;
    f >> magic;
    if (magic != "P5") {
        throw std::runtime_error("read_pgm: not a binary PGM (P5): " + path.string());
    }
    // header tokens may be separated by whitespace and '#' comments
    auto next_int = [&f, &path]() {
        int v;
        while (true) {
            f >> std::ws;
            if (f.peek() == '#') {
                std::string line;
                std::getline(f, line);
                continue;
            }
            if (!(f >> v)) {
                throw std::runtime_error("read_pgm: malformed header in " + path.string());
            }
            return v;
        }
    };
    const int w = next_int();
    const int h = next_int();
    const int maxval = next_int();
    if (w <= 0 || h <= 0 || maxval != 255) {
        throw std::runtime_error("read_pgm: unsupported dimensions/maxval in " + path.string());
    }
    f.get();  // single whitespace byte after maxval
    GrayImage img(w, h);
    f.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.size()));
    if (f.gcount() != static_cast<std::streamsize>(img.size())) {
        throw std::runtime_error("read_pgm: truncated pixel data in " + path.string());
    }
    return img;
}

/// Canonical per-frame image filename: frame_000042.pgm
inline std::string frame_filename(int frame_index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06d.pgm", frame_index);
    return buf;
}

}  // namespace cogsense

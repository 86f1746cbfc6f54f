// Drawing helpers shared by the synthetic art and scene generators.
#pragma once

#include "shelfscan/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace shelfscan::detail {

using Rgb = std::array<double, 3>;

inline Rgb hsl_color(double h, double s, double l01) {
    Rgb c;
    hsl_to_rgb({h, s, l01 * 255.0}, c[0], c[1], c[2]);
    return c;
}

inline void put(RasterImage& img, int x, int y, const Rgb& c, double alpha = 1.0) {
    if (x < 0 || y < 0 || x >= img.width() || y >= img.height() || alpha <= 0) return;
    for (int k = 0; k < 3; ++k) {
        const double v = img.at(x, y, k) * (1.0 - alpha) + c[k] * alpha;
        img.at(x, y, k) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
}

inline void fill_rect(RasterImage& img, double x0, double y0, double x1, double y1, const Rgb& c) {
    const int ix0 = std::max(0, static_cast<int>(std::ceil(x0)));
    const int iy0 = std::max(0, static_cast<int>(std::ceil(y0)));
    const int ix1 = std::min(img.width(), static_cast<int>(std::ceil(x1)));
    const int iy1 = std::min(img.height(), static_cast<int>(std::ceil(y1)));
    for (int y = iy0; y < iy1; ++y)
        for (int x = ix0; x < ix1; ++x) put(img, x, y, c);
}

inline void fill_circle(RasterImage& img, double cx, double cy, double r, const Rgb& c, double inner = -1) {
    const int x0 = std::max(0, static_cast<int>(cx - r - 1));
    const int x1 = std::min(img.width() - 1, static_cast<int>(cx + r + 1));
    const int y0 = std::max(0, static_cast<int>(cy - r - 1));
    const int y1 = std::min(img.height() - 1, static_cast<int>(cy + r + 1));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double d = std::hypot(x - cx, y - cy);
            if (d <= r && d >= inner) put(img, x, y, c);
        }
    }
}

inline bool inside_polygon(const double* xs, const double* ys, int n, double px, double py) {
    bool in = false;
    for (int i = 0, j = n - 1; i < n; j = i++) {
        if ((ys[i] > py) != (ys[j] > py) && px < (xs[j] - xs[i]) * (py - ys[i]) / (ys[j] - ys[i]) + xs[i]) in = !in;
    }
    return in;
}

inline void fill_polygon(RasterImage& img, const double* xs, const double* ys, int n, const Rgb& c) {
    const double minx = *std::min_element(xs, xs + n), maxx = *std::max_element(xs, xs + n);
    const double miny = *std::min_element(ys, ys + n), maxy = *std::max_element(ys, ys + n);
    for (int y = std::max(0, static_cast<int>(miny)); y <= std::min(img.height() - 1, static_cast<int>(maxy)); ++y) {
        for (int x = std::max(0, static_cast<int>(minx)); x <= std::min(img.width() - 1, static_cast<int>(maxx)); ++x) {
            if (inside_polygon(xs, ys, n, x, y)) put(img, x, y, c);
        }
    }
}

inline void draw_line(RasterImage& img, double ax, double ay, double bx, double by, double thickness, const Rgb& c) {
    const double r = thickness / 2.0;
    const int x0 = std::max(0, static_cast<int>(std::min(ax, bx) - r - 1));
    const int x1 = std::min(img.width() - 1, static_cast<int>(std::max(ax, bx) + r + 1));
    const int y0 = std::max(0, static_cast<int>(std::min(ay, by) - r - 1));
    const int y1 = std::min(img.height() - 1, static_cast<int>(std::max(ay, by) + r + 1));
    const double dx = bx - ax, dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            double t = len2 > 0 ? ((x - ax) * dx + (y - ay) * dy) / len2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            if (std::hypot(x - (ax + t * dx), y - (ay + t * dy)) <= r) put(img, x, y, c);
        }
    }
}

}  // namespace shelfscan::detail

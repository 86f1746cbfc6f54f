#include "canvas.hpp"
#include "shelfscan/error.hpp"
#include "shelfscan/evalkit.hpp"

#include <numbers>

namespace shelfscan {

using detail::Rgb;

namespace {

void draw_glyph_row(RasterImage& img, std::mt19937_64& rng, double x0, double y0, double x1, double cell_h,
                    const Rgb& ink) {
    std::uniform_int_distribution<int> node(0, 8);
    std::uniform_int_distribution<int> strokes(2, 4);
    const double cell_w = cell_h * 0.62;
    const double thick = std::max(2.0, cell_h / 6.5);
    for (double gx = x0; gx + cell_w <= x1; gx += cell_w * 1.25) {
        if (std::uniform_real_distribution<>(0, 1)(rng) < 0.15) continue;  // word gap
        const int n = strokes(rng);
        for (int s = 0; s < n; ++s) {
            int a = node(rng), b = node(rng);
            if (a == b) b = (a + 4) % 9;
            const auto px = [&](int k) { return gx + (k % 3) * cell_w / 2.0; };
            const auto py = [&](int k) { return y0 + (k / 3) * cell_h / 2.0; };
            detail::draw_line(img, px(a), py(a), px(b), py(b), thick, ink);
        }
    }
}

void draw_star(RasterImage& img, double cx, double cy, double r_out, double r_in, int points, double phase,
               const Rgb& c) {
    std::vector<double> xs, ys;
    for (int i = 0; i < 2 * points; ++i) {
        const double r = i % 2 ? r_in : r_out;
        const double a = phase + i * std::numbers::pi / points;
        xs.push_back(cx + r * std::cos(a));
        ys.push_back(cy + r * std::sin(a));
    }
    detail::fill_polygon(img, xs.data(), ys.data(), static_cast<int>(xs.size()), c);
}

}  // namespace

RasterImage generate_product_art(std::uint64_t seed, int width, int height, int variant) {
    if (width < 16 || height < 16) throw InvalidArgument("generate_product_art: image must be at least 16x16");
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 0x1234567ULL);
    std::uniform_real_distribution<> u(0.0, 1.0);
    const auto uni = [&](double a, double b) { return a + (b - a) * u(rng); };

    const double hue0 = uni(0, 360);
    const std::array<double, 4> palette = {hue0, std::fmod(hue0 + uni(80, 140), 360),
                                           std::fmod(hue0 + uni(160, 200), 360), std::fmod(hue0 + uni(220, 280), 360)};
    const auto pick = [&](double lmin, double lmax) {
        return detail::hsl_color(palette[static_cast<int>(u(rng) * 4) % 4], uni(0.55, 0.95), uni(lmin, lmax));
    };

    // an edition keeps every draw but flips the lightness of the large panels
    const auto panel_l = [&](double l) { return variant == 0 ? l : (l < 0.5 ? l + 0.35 : l - 0.35); };

    RasterImage img(width, height, 3);
    const double bg_s = uni(0.5, 0.85);
    const Rgb bg = detail::hsl_color(hue0, bg_s, panel_l(uni(0.45, 0.7)));
    detail::fill_rect(img, 0, 0, width, height, bg);

    const double m = std::min(width, height);
    // colored panel band
    const double band_y = uni(0.1, 0.55) * height;
    const double band_h = uni(0.18, 0.32) * height;
    const double band_hue = palette[static_cast<int>(u(rng) * 4) % 4];
    const double band_s = uni(0.55, 0.95);
    detail::fill_rect(img, 0, band_y, width, band_y + band_h, detail::hsl_color(band_hue, band_s, panel_l(uni(0.25, 0.6))));

    const int shapes = 6 + static_cast<int>(u(rng) * 5);
    for (int i = 0; i < shapes; ++i) {
        const double cx = uni(0.05, 0.95) * width;
        const double cy = uni(0.05, 0.95) * height;
        const double r = uni(0.05, 0.16) * m;
        const Rgb c = pick(0.15, 0.85);
        switch (static_cast<int>(u(rng) * 4)) {
            case 0: detail::fill_circle(img, cx, cy, r, c); break;
            case 1: detail::fill_circle(img, cx, cy, r, c, r * uni(0.4, 0.7)); break;
            case 2: detail::fill_rect(img, cx - r, cy - r * uni(0.4, 1.0), cx + r * uni(0.6, 1.4), cy + r, c); break;
            default: {
                const double a = uni(0, 2 * std::numbers::pi);
                const double xs[3] = {cx + r * std::cos(a), cx + r * std::cos(a + 2.1), cx + r * 1.2 * std::cos(a + 4.0)};
                const double ys[3] = {cy + r * std::sin(a), cy + r * std::sin(a + 2.1), cy + r * 1.2 * std::sin(a + 4.0)};
                detail::fill_polygon(img, xs, ys, 3, c);
            }
        }
    }

    // logo
    draw_star(img, uni(0.25, 0.75) * width, uni(0.25, 0.75) * height, m * uni(0.14, 0.22), m * uni(0.06, 0.1),
              5 + static_cast<int>(u(rng) * 3), uni(0, 6.283), pick(0.2, 0.8));

    // two rows of lettering, dark or light ink
    const int rows = 2 + static_cast<int>(u(rng) * 2);
    for (int r = 0; r < rows; ++r) {
        const double cell_h = uni(0.07, 0.12) * height;
        const double y0 = uni(0.05, 0.9) * (height - cell_h);
        const Rgb ink = u(rng) < 0.5 ? Rgb{20, 20, 25} : Rgb{245, 245, 240};
        draw_glyph_row(img, rng, uni(0.04, 0.3) * width, y0, uni(0.7, 0.96) * width, cell_h, ink);
    }

    // frame
    const Rgb frame = detail::hsl_color(palette[1], 0.7, 0.2);
    detail::fill_rect(img, 0, 0, width, 3, frame);
    detail::fill_rect(img, 0, height - 3, width, height, frame);
    detail::fill_rect(img, 0, 0, 3, height, frame);
    detail::fill_rect(img, width - 3, 0, width, height, frame);
    return img;
}

}  // namespace shelfscan

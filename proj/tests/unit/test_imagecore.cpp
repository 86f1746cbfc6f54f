#include "shelfscan/error.hpp"
#include "shelfscan/image.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

using namespace shelfscan;
namespace fs = std::filesystem;

namespace {

RasterImage random_image(std::uint64_t seed, int w, int h, int ch) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> u(0, 255);
    RasterImage img(w, h, ch);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(u(rng));
    return img;
}

// Textbook HSL, written independently of the library.
void hsl_reference(double r, double g, double b, double& h, double& s, double& l) {
    r /= 255;
    g /= 255;
    b /= 255;
    const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
    const double d = mx - mn;
    l = (mx + mn) / 2;
    if (d == 0) {
        h = 0;
        s = 0;
    } else {
        s = d / (1 - std::fabs(2 * l - 1));
        if (mx == r) {
            h = 60 * std::fmod((g - b) / d + 6, 6.0);
        } else if (mx == g) {
            h = 60 * ((b - r) / d + 2);
        } else {
            h = 60 * ((r - g) / d + 4);
        }
    }
    l *= 255;
}

std::uint64_t pixel_sum(const RasterImage& img) {
    return std::accumulate(img.data().begin(), img.data().end(), std::uint64_t{0});
}

}  // namespace

TEST_SUITE("imagecore") {

TEST_CASE("raster image rejects bad geometry") {
    CHECK_THROWS_AS(RasterImage(0, 3, 1), InvalidArgument);
    CHECK_THROWS_AS(RasterImage(3, 3, 2), InvalidArgument);
    CHECK_THROWS_AS(RasterImage(2, 2, 1, std::vector<std::uint8_t>(3)), InvalidArgument);
    const RasterImage img(4, 3, 3, 7);
    CHECK(img.data().size() == 36u);
}

TEST_CASE("grayscale") {
    const RasterImage gray3(5, 4, 3, 100);
    const RasterImage g = to_grayscale(gray3);
    CHECK(g.channels() == 1);
    CHECK(std::all_of(g.data().begin(), g.data().end(), [](auto v) { return v == 100; }));

    const RasterImage one = random_image(3, 6, 5, 1);
    CHECK(to_grayscale(one) == one);

    RasterImage red(3, 3, 3, 0);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x) red.at(x, y, 0) = 255;
    CHECK(to_grayscale(red).at(1, 1) == 76);

    const RasterImage rgb = random_image(4, 17, 9, 3);
    CHECK(to_grayscale(to_grayscale(rgb)) == to_grayscale(rgb));
    for (int y = 0; y < 9; ++y) {
        for (int x = 0; x < 17; ++x) {
            const int expect = static_cast<int>(
                std::lround(0.299 * rgb.at(x, y, 0) + 0.587 * rgb.at(x, y, 1) + 0.114 * rgb.at(x, y, 2)));
            CHECK(to_grayscale(rgb).at(x, y) == expect);
        }
    }
}

TEST_CASE("hsl examples") {
    Hsl c = rgb_to_hsl(255, 0, 0);
    CHECK(c.h == doctest::Approx(0));
    CHECK(c.s == doctest::Approx(1));
    CHECK(std::lround(c.l) == 128);

    c = rgb_to_hsl(128, 128, 128);
    CHECK(c.h == 0);
    CHECK(c.s == 0);
    CHECK(c.l == doctest::Approx(128));

    CHECK(rgb_to_hsl(0, 255, 255).h == doctest::Approx(180));
}

TEST_CASE("hsl matches the textbook transform and round-trips on a 17^3 lattice") {
    int worst = 0;
    for (int r = 0; r <= 256; r += 16) {
        for (int g = 0; g <= 256; g += 16) {
            for (int b = 0; b <= 256; b += 16) {
                const double R = std::min(r, 255), G = std::min(g, 255), B = std::min(b, 255);
                double h, s, l;
                hsl_reference(R, G, B, h, s, l);
                const Hsl c = rgb_to_hsl(R, G, B);
                CHECK(c.l == doctest::Approx(l).epsilon(1e-12));
                CHECK(c.s == doctest::Approx(s).epsilon(1e-9));
                if (s > 0) CHECK(std::fabs(std::remainder(c.h - h, 360.0)) < 1e-9);
                CHECK(c.h >= 0);
                CHECK(c.h < 360);
                double rr, gg, bb;
                hsl_to_rgb(c, rr, gg, bb);
                worst = std::max({worst, static_cast<int>(std::fabs(std::lround(rr) - R)),
                                  static_cast<int>(std::fabs(std::lround(gg) - G)),
                                  static_cast<int>(std::fabs(std::lround(bb) - B))});
            }
        }
    }
    CHECK(worst <= 1);
}

TEST_CASE("color sample") {
    const ColorSample c = make_color_sample(10, 200, 30);
    CHECK(c.r == 10);
    CHECK(c.g == 200);
    CHECK(c.b == 30);
    CHECK(c.luminance == luminance_601(10, 200, 30));
    CHECK(c.luminance == static_cast<int>(std::lround(0.299 * 10 + 0.587 * 200 + 0.114 * 30)));
}

TEST_CASE("resize") {
    const RasterImage flat(7, 5, 3, 91);
    const RasterImage big = resize_bilinear(flat, 23, 2);
    CHECK(big.width() == 23);
    CHECK(big.height() == 2);
    CHECK(std::all_of(big.data().begin(), big.data().end(), [](auto v) { return v == 91; }));

    RasterImage ramp(2, 1, 1);
    ramp.at(0, 0) = 0;
    ramp.at(1, 0) = 255;
    const RasterImage up = resize_bilinear(ramp, 4, 1);
    for (int x = 1; x < 4; ++x) CHECK(up.at(x, 0) >= up.at(x - 1, 0));
    CHECK(up.at(0, 0) < up.at(3, 0));

    const RasterImage img = random_image(9, 13, 8, 3);
    CHECK(resize_bilinear(img, 13, 8) == img);
    CHECK_THROWS_AS(resize_bilinear(img, 0, 4), InvalidArgument);
}

TEST_CASE("gaussian blur") {
    const RasterImage flat(9, 9, 1, 40);
    CHECK(gaussian_blur(flat, 1.5) == flat);
    CHECK_THROWS_AS(gaussian_blur(flat, 0.0), InvalidArgument);

    FloatPlane spike(41, 41);
    spike.at(20, 20) = 1000.0f;
    const FloatPlane b = gaussian_blur(spike, 2.0);
    const double total = std::accumulate(b.data.begin(), b.data.end(), 0.0);
    CHECK(total == doctest::Approx(1000.0).epsilon(0.01));
    CHECK(b.at(18, 20) == doctest::Approx(b.at(22, 20)));
    CHECK(b.at(20, 17) == doctest::Approx(b.at(17, 20)));
    CHECK(b.at(20, 20) > b.at(21, 20));

    RasterImage impulse(41, 41, 1, 0);
    impulse.at(20, 20) = 255;
    impulse.at(19, 20) = 255;
    const auto before = static_cast<double>(pixel_sum(impulse));
    const auto after = static_cast<double>(pixel_sum(gaussian_blur(impulse, 1.0)));
    CHECK(std::fabs(after - before) <= 0.01 * before);

    // direct 2-D convolution with edge clamping, kernel radius 150 over an 8x8 image
    const RasterImage noise = random_image(11, 8, 8, 1);
    const double sigma = 50.0;
    const int R = static_cast<int>(std::ceil(3 * sigma));
    std::vector<double> k(2 * R + 1);
    double ksum = 0;
    for (int i = -R; i <= R; ++i) ksum += k[i + R] = std::exp(-i * i / (2 * sigma * sigma));
    const RasterImage wide = gaussian_blur(noise, sigma);
    int worst = 0;
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            double acc = 0;
            for (int dy = -R; dy <= R; ++dy)
                for (int dx = -R; dx <= R; ++dx)
                    acc += k[dy + R] * k[dx + R] * noise.at(std::clamp(x + dx, 0, 7), std::clamp(y + dy, 0, 7));
            worst = std::max(worst, static_cast<int>(std::lround(std::fabs(acc / (ksum * ksum) - wide.at(x, y)))));
        }
    }
    CHECK(worst <= 1);
}

TEST_CASE("ncc") {
    const RasterImage a = random_image(5, 12, 10, 1);
    CHECK(ncc(a, a) == doctest::Approx(1.0));
    RasterImage neg = a;
    for (auto& v : neg.data()) v = static_cast<std::uint8_t>(255 - v);
    CHECK(ncc(a, neg) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ncc(a, RasterImage(12, 10, 1, 77)) == doctest::Approx(0.5));
    const RasterImage b = random_image(6, 12, 10, 1);
    CHECK(ncc(a, b) == doctest::Approx(ncc(b, a)));
    CHECK(ncc(a, b) > 0.0);
    CHECK(ncc(a, b) < 1.0);
    CHECK_THROWS_AS(ncc(a, RasterImage(11, 10, 1)), InvalidArgument);
}

TEST_CASE("subimage extraction") {
    const RasterImage img = random_image(8, 100, 100, 3);
    CHECK(extract_subimage(img, {49.5, 49.5, 100, 100, 0}) == img);

    const RasterImage crop = extract_subimage(img, {9.5, 9.5, 10, 10, 0});
    REQUIRE(crop.width() == 10);
    REQUIRE(crop.height() == 10);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x)
            for (int c = 0; c < 3; ++c) CHECK(crop.at(x, y, c) == img.at(5 + x, 5 + y, c));

    const RasterImage half = extract_subimage(img, {-0.5, 49.5, 20, 10, 0});
    CHECK(half.width() == 10);
    CHECK(half.height() == 10);
    CHECK(half.at(0, 0, 0) == img.at(0, 45, 0));

    CHECK_THROWS_AS(extract_subimage(img, {-50, -50, 10, 10, 0}), InvalidArgument);
}

TEST_CASE("rectified extraction undoes the envelope rotation") {
    const RasterImage img = random_image(12, 60, 40, 3);
    CHECK(extract_rectified(img, {29.5, 19.5, 60, 40, 0}) == img);

    // a 90 degree turn maps pattern column u onto scene row u
    const RasterImage r = extract_rectified(img, {29.5, 19.5, 20, 10, 90});
    REQUIRE(r.width() == 20);
    REQUIRE(r.height() == 10);
    for (int v = 0; v < 10; ++v) {
        for (int u = 0; u < 20; ++u) {
            const int sx = static_cast<int>(std::lround(29.5 - (v - 4.5)));
            const int sy = static_cast<int>(std::lround(19.5 + (u - 9.5)));
            CHECK(r.at(u, v, 1) == img.at(sx, sy, 1));
        }
    }
}

TEST_CASE("png round trip and codec errors") {
    const fs::path dir = fs::temp_directory_path() / "shelfscan_unit_png";
    fs::create_directories(dir);
    const RasterImage rgb = random_image(13, 31, 17, 3);
    const RasterImage gray = random_image(14, 9, 23, 1);
    write_png(rgb, dir / "rgb.png");
    write_png(gray, dir / "gray.png");
    CHECK(read_image(dir / "rgb.png") == rgb);
    CHECK(read_image(dir / "gray.png") == gray);

    {
        std::ofstream out(dir / "corrupt.png", std::ios::binary);
        out << "\x89PNG\r\n\x1a\n garbage";
    }
    CHECK_THROWS_AS(read_image(dir / "corrupt.png"), IoError);
    CHECK_THROWS_AS(read_image(dir / "missing.png"), IoError);
    fs::remove_all(dir);
}

TEST_CASE("geometry helpers") {
    CHECK(wrap_signed_deg(180) == -180);
    CHECK(wrap_signed_deg(-190) == doctest::Approx(170));
    CHECK(wrap_unsigned_deg(-10) == doctest::Approx(350));
    CHECK(wrap_unsigned_deg(360) == 0);
    CHECK(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == doctest::Approx(1));
    CHECK(iou({0, 0, 10, 10}, {5, 0, 15, 10}) == doctest::Approx(1.0 / 3));
    CHECK(iou({0, 0, 1, 1}, {2, 2, 3, 3}) == 0);

    const Envelope e{0, 0, 20, 10, 90};
    CHECK(e.contains(0, 9.9));
    CHECK_FALSE(e.contains(9.9, 0));
    const BoxD bb = e.bounding_box();
    CHECK(bb.width() == doctest::Approx(10));
    CHECK(bb.height() == doctest::Approx(20));
}

}

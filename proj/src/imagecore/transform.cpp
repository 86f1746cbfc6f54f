#include "shelfscan/error.hpp"
#include "shelfscan/image.hpp"

#include <algorithm>
#include <cmath>

namespace shelfscan {

namespace {

std::uint8_t to_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

std::vector<float> gaussian_kernel(double sigma, int radius) {
    std::vector<float> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
        k[i + radius] = static_cast<float>(v);
        sum += v;
    }
    for (auto& v : k) v = static_cast<float>(v / sum);
    return k;
}

// Horizontal then vertical pass over a strided float buffer, clamped borders.
void separable_convolve(const float* src, float* dst, int w, int h, const std::vector<float>& k) {
    const int r = static_cast<int>(k.size() / 2);
    std::vector<float> tmp(static_cast<std::size_t>(w) * h);
    std::vector<float> row(w + 2 * r);
    for (int y = 0; y < h; ++y) {
        const float* in = src + static_cast<std::size_t>(y) * w;
        for (int i = 0; i < w + 2 * r; ++i) row[i] = in[std::clamp(i - r, 0, w - 1)];
        float* out = tmp.data() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            const float* p = row.data() + x;
            for (std::size_t j = 0; j < k.size(); ++j) acc += p[j] * k[j];
            out[x] = acc;
        }
    }
    std::vector<float> acc(w);
    for (int y = 0; y < h; ++y) {
        std::fill(acc.begin(), acc.end(), 0.0f);
        for (int j = -r; j <= r; ++j) {
            const int yy = std::clamp(y + j, 0, h - 1);
            const float kv = k[j + r];
            const float* in = tmp.data() + static_cast<std::size_t>(yy) * w;
            for (int x = 0; x < w; ++x) acc[x] += in[x] * kv;
        }
        std::copy(acc.begin(), acc.end(), dst + static_cast<std::size_t>(y) * w);
    }
}

void check_sigma(double sigma) {
    if (!(sigma > 0.0)) throw InvalidArgument("gaussian sigma must be positive");
}

struct Tap {
    int i0;
    int i1;
    float frac;
};

std::vector<Tap> bilinear_taps(int src_n, int dst_n) {
    std::vector<Tap> taps(dst_n);
    const double scale = static_cast<double>(src_n) / dst_n;
    for (int i = 0; i < dst_n; ++i) {
        double s = (i + 0.5) * scale - 0.5;
        s = std::clamp(s, 0.0, static_cast<double>(src_n - 1));
        const int i0 = static_cast<int>(std::floor(s));
        const int i1 = std::min(i0 + 1, src_n - 1);
        taps[i] = {i0, i1, static_cast<float>(s - i0)};
    }
    return taps;
}

}  // namespace

RasterImage to_grayscale(const RasterImage& img) {
    if (img.channels() == 1) return img;
    if (img.channels() != 3) throw InvalidArgument("to_grayscale expects 1 or 3 channels");
    RasterImage out(img.width(), img.height(), 1);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            out.at(x, y) = static_cast<std::uint8_t>(
                luminance_601(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)));
        }
    }
    return out;
}

RasterImage resize_bilinear(const RasterImage& img, int new_w, int new_h) {
    if (new_w < 1 || new_h < 1) throw InvalidArgument("resize target dimensions must be positive");
    if (img.empty()) throw InvalidArgument("cannot resize an empty image");
    if (new_w == img.width() && new_h == img.height()) return img;
    const auto tx = bilinear_taps(img.width(), new_w);
    const auto ty = bilinear_taps(img.height(), new_h);
    const int ch = img.channels();
    RasterImage out(new_w, new_h, ch);
    for (int y = 0; y < new_h; ++y) {
        const Tap& vy = ty[y];
        for (int x = 0; x < new_w; ++x) {
            const Tap& vx = tx[x];
            for (int c = 0; c < ch; ++c) {
                const double top = img.at(vx.i0, vy.i0, c) * (1.0 - vx.frac) + img.at(vx.i1, vy.i0, c) * vx.frac;
                const double bot = img.at(vx.i0, vy.i1, c) * (1.0 - vx.frac) + img.at(vx.i1, vy.i1, c) * vx.frac;
                out.at(x, y, c) = to_u8(top * (1.0 - vy.frac) + bot * vy.frac);
            }
        }
    }
    return out;
}

FloatPlane resize_bilinear(const FloatPlane& img, int new_w, int new_h) {
    if (new_w < 1 || new_h < 1) throw InvalidArgument("resize target dimensions must be positive");
    if (new_w == img.width && new_h == img.height) return img;
    const auto tx = bilinear_taps(img.width, new_w);
    const auto ty = bilinear_taps(img.height, new_h);
    FloatPlane out(new_w, new_h);
    for (int y = 0; y < new_h; ++y) {
        const Tap& vy = ty[y];
        for (int x = 0; x < new_w; ++x) {
            const Tap& vx = tx[x];
            const float top = img.at(vx.i0, vy.i0) * (1.0f - vx.frac) + img.at(vx.i1, vy.i0) * vx.frac;
            const float bot = img.at(vx.i0, vy.i1) * (1.0f - vx.frac) + img.at(vx.i1, vy.i1) * vx.frac;
            out.at(x, y) = top * (1.0f - vy.frac) + bot * vy.frac;
        }
    }
    return out;
}

FloatPlane gaussian_blur(const FloatPlane& img, double sigma, int radius) {
    check_sigma(sigma);
    FloatPlane out(img.width, img.height);
    separable_convolve(img.data.data(), out.data.data(), img.width, img.height,
                       gaussian_kernel(sigma, std::max(radius, 1)));
    return out;
}

FloatPlane gaussian_blur(const FloatPlane& img, double sigma) {
    check_sigma(sigma);
    return gaussian_blur(img, sigma, static_cast<int>(std::ceil(3.0 * sigma)));
}

RasterImage gaussian_blur(const RasterImage& img, double sigma) {
    check_sigma(sigma);
    const int w = img.width();
    const int h = img.height();
    const auto k = gaussian_kernel(sigma, std::max(1, static_cast<int>(std::ceil(3.0 * sigma))));
    RasterImage out(w, h, img.channels());
    std::vector<float> plane(static_cast<std::size_t>(w) * h);
    std::vector<float> blurred(plane.size());
    for (int c = 0; c < img.channels(); ++c) {
        for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = img.data()[i * img.channels() + c];
        separable_convolve(plane.data(), blurred.data(), w, h, k);
        for (std::size_t i = 0; i < plane.size(); ++i) out.data()[i * img.channels() + c] = to_u8(blurred[i]);
    }
    return out;
}

PixelWindow envelope_window(const Envelope& envelope, int image_w, int image_h) {
    const BoxD bb = envelope.bounding_box();
    // A pixel belongs to the crop when its center lies in [x0, x1).
    constexpr double eps = 1e-9;
    PixelWindow win;
    win.x0 = std::max(0, static_cast<int>(std::ceil(bb.x0 - eps)));
    win.y0 = std::max(0, static_cast<int>(std::ceil(bb.y0 - eps)));
    win.x1 = std::min(image_w, static_cast<int>(std::ceil(bb.x1 - eps)));
    win.y1 = std::min(image_h, static_cast<int>(std::ceil(bb.y1 - eps)));
    return win;
}

RasterImage extract_subimage(const RasterImage& img, const Envelope& envelope) {
    if (img.empty()) throw InvalidArgument("cannot crop an empty image");
    const PixelWindow win = envelope_window(envelope, img.width(), img.height());
    if (win.empty()) throw InvalidArgument("envelope does not intersect the image");
    const int w = win.x1 - win.x0;
    const int h = win.y1 - win.y0;
    const int ch = img.channels();
    RasterImage out(w, h, ch);
    for (int y = 0; y < h; ++y) {
        const auto src = img.data().subspan((static_cast<std::size_t>(win.y0 + y) * img.width() + win.x0) * ch,
                                            static_cast<std::size_t>(w) * ch);
        std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(y) * w * ch);
    }
    return out;
}

RasterImage extract_rectified(const RasterImage& img, const Envelope& envelope) {
    if (img.empty()) throw InvalidArgument("cannot crop an empty image");
    if (envelope_window(envelope, img.width(), img.height()).empty()) {
        throw InvalidArgument("envelope does not intersect the image");
    }
    const int w = std::max(1, static_cast<int>(std::lround(envelope.width)));
    const int h = std::max(1, static_cast<int>(std::lround(envelope.height)));
    const int ch = img.channels();
    const double rad = deg_to_rad(envelope.rotation);
    const double cs = std::cos(rad), sn = std::sin(rad);
    const double sx = envelope.width / w, sy = envelope.height / h;
    RasterImage out(w, h, ch);
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
            const double u = (i + 0.5) * sx - envelope.width / 2.0;
            const double v = (j + 0.5) * sy - envelope.height / 2.0;
            const double x = std::clamp(envelope.center_x + cs * u - sn * v, 0.0, img.width() - 1.0);
            const double y = std::clamp(envelope.center_y + sn * u + cs * v, 0.0, img.height() - 1.0);
            const int x0 = static_cast<int>(x), y0 = static_cast<int>(y);
            const int x1 = std::min(x0 + 1, img.width() - 1), y1 = std::min(y0 + 1, img.height() - 1);
            const double tx = x - x0, ty = y - y0;
            for (int c = 0; c < ch; ++c) {
                const double a = img.at(x0, y0, c) + (img.at(x1, y0, c) - img.at(x0, y0, c)) * tx;
                const double b = img.at(x0, y1, c) + (img.at(x1, y1, c) - img.at(x0, y1, c)) * tx;
                out.at(i, j, c) = static_cast<std::uint8_t>(std::clamp(std::lround(a + (b - a) * ty), 0L, 255L));
            }
        }
    }
    return out;
}

}  // namespace shelfscan

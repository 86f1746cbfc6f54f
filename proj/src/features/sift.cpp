/**
 * @file sift.cpp
 * @brief Difference-of-Gaussians keypoint detector and gradient-histogram
 *        descriptor.
 *
 * Coordinates are in pixel-index space (pixel centers at integers), angles in
 * degrees measured with y pointing down: an orientation of 90 points along +y.
 */

#include "shelfscan/error.hpp"
#include "shelfscan/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace shelfscan {

namespace {

constexpr int kImageBorder = 5;
constexpr int kMaxInterpSteps = 5;
constexpr int kOriBins = 36;
constexpr double kOriSigmaFactor = 1.5;
constexpr double kOriRadiusFactor = 3.0 * kOriSigmaFactor;
constexpr double kOriPeakRatio = 0.8;
constexpr int kDescWidth = 4;
constexpr int kDescBins = 8;
constexpr double kDescSclFactor = 3.0;
constexpr float kDescMagThreshold = 0.2f;

struct GradientPlane {
    FloatPlane magnitude;
    FloatPlane angle;  // degrees [0, 360)
};

struct Octave {
    std::vector<FloatPlane> gauss;  // s + 3 images
    std::vector<FloatPlane> dog;    // s + 2 images
    std::vector<GradientPlane> grad;  // indexed like gauss, filled for layers 1..s
};

struct RawKeypoint {
    int octave;
    int layer;
    int x;  // octave pixel coords after refinement
    int y;
    double xi;  // subpixel/sublevel offsets
    double xc;
    double xr;
};

FloatPlane downsample_half(const FloatPlane& src) {
    const int w = std::max(1, src.width / 2);
    const int h = std::max(1, src.height / 2);
    FloatPlane out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) out.at(x, y) = src.at(std::min(2 * x, src.width - 1), std::min(2 * y, src.height - 1));
    }
    return out;
}

GradientPlane compute_gradients(const FloatPlane& img) {
    GradientPlane g{FloatPlane(img.width, img.height), FloatPlane(img.width, img.height)};
    for (int y = 1; y + 1 < img.height; ++y) {
        for (int x = 1; x + 1 < img.width; ++x) {
            const float dx = img.at(x + 1, y) - img.at(x - 1, y);
            const float dy = img.at(x, y + 1) - img.at(x, y - 1);
            g.magnitude.at(x, y) = std::sqrt(dx * dx + dy * dy);
            float a = std::atan2(dy, dx) * static_cast<float>(180.0 / std::numbers::pi);
            if (a < 0) a += 360.0f;
            if (a >= 360.0f) a -= 360.0f;
            g.angle.at(x, y) = a;
        }
    }
    return g;
}

std::vector<Octave> build_pyramid(const FloatPlane& base_in, const ExtractorConfig& cfg, int n_octaves) {
    const int s = cfg.scales_per_octave;
    const double k = std::pow(2.0, 1.0 / s);
    std::vector<double> sig(s + 3);
    sig[0] = cfg.base_sigma;
    for (int i = 1; i < s + 3; ++i) {
        const double prev = std::pow(k, i - 1) * cfg.base_sigma;
        const double total = prev * k;
        sig[i] = std::sqrt(total * total - prev * prev);
    }

    std::vector<Octave> pyr(n_octaves);
    for (int o = 0; o < n_octaves; ++o) {
        auto& oct = pyr[o];
        oct.gauss.reserve(s + 3);
        if (o == 0) {
            oct.gauss.push_back(base_in);
        } else {
            oct.gauss.push_back(downsample_half(pyr[o - 1].gauss[s]));
        }
        for (int i = 1; i < s + 3; ++i) {
            const double sg = sig[i];
            oct.gauss.push_back(gaussian_blur(oct.gauss.back(), sg, static_cast<int>(std::ceil(4.0 * sg))));
        }
        for (int i = 0; i < s + 2; ++i) {
            FloatPlane d(oct.gauss[i].width, oct.gauss[i].height);
            for (std::size_t p = 0; p < d.data.size(); ++p) d.data[p] = oct.gauss[i + 1].data[p] - oct.gauss[i].data[p];
            oct.dog.push_back(std::move(d));
        }
        oct.grad.resize(s + 3);
        for (int i = 1; i <= s; ++i) oct.grad[i] = compute_gradients(oct.gauss[i]);
    }
    return pyr;
}

bool is_extremum(const Octave& oct, int layer, int x, int y, float v) {
    if (v > 0) {
        for (int l = layer - 1; l <= layer + 1; ++l) {
            const FloatPlane& d = oct.dog[l];
            for (int yy = y - 1; yy <= y + 1; ++yy) {
                for (int xx = x - 1; xx <= x + 1; ++xx) {
                    if (l == layer && yy == y && xx == x) continue;
                    if (d.at(xx, yy) > v) return false;
                }
            }
        }
        return true;
    }
    for (int l = layer - 1; l <= layer + 1; ++l) {
        const FloatPlane& d = oct.dog[l];
        for (int yy = y - 1; yy <= y + 1; ++yy) {
            for (int xx = x - 1; xx <= x + 1; ++xx) {
                if (l == layer && yy == y && xx == x) continue;
                if (d.at(xx, yy) < v) return false;
            }
        }
    }
    return true;
}

// Quadratic refinement in (x, y, scale); rejects low contrast and edge responses.
bool refine_extremum(const Octave& oct, const ExtractorConfig& cfg, RawKeypoint& kp) {
    const int s = cfg.scales_per_octave;
    const int w = oct.dog[0].width;
    const int h = oct.dog[0].height;
    double xi = 0, xr = 0, xc = 0;
    int x = kp.x, y = kp.y, layer = kp.layer;
    int step = 0;
    double dD[3] = {};
    double X[3] = {};
    for (; step < kMaxInterpSteps; ++step) {
        const FloatPlane& img = oct.dog[layer];
        const FloatPlane& prev = oct.dog[layer - 1];
        const FloatPlane& next = oct.dog[layer + 1];
        dD[0] = (img.at(x + 1, y) - img.at(x - 1, y)) * 0.5;
        dD[1] = (img.at(x, y + 1) - img.at(x, y - 1)) * 0.5;
        dD[2] = (next.at(x, y) - prev.at(x, y)) * 0.5;
        const double v2 = img.at(x, y) * 2.0;
        const double dxx = img.at(x + 1, y) + img.at(x - 1, y) - v2;
        const double dyy = img.at(x, y + 1) + img.at(x, y - 1) - v2;
        const double dss = next.at(x, y) + prev.at(x, y) - v2;
        const double dxy = (img.at(x + 1, y + 1) - img.at(x - 1, y + 1) - img.at(x + 1, y - 1) + img.at(x - 1, y - 1)) * 0.25;
        const double dxs = (next.at(x + 1, y) - next.at(x - 1, y) - prev.at(x + 1, y) + prev.at(x - 1, y)) * 0.25;
        const double dys = (next.at(x, y + 1) - next.at(x, y - 1) - prev.at(x, y + 1) + prev.at(x, y - 1)) * 0.25;

        // Solve H X = -dD by Cramer's rule (3x3 symmetric).
        const double H[3][3] = {{dxx, dxy, dxs}, {dxy, dyy, dys}, {dxs, dys, dss}};
        const double det = H[0][0] * (H[1][1] * H[2][2] - H[1][2] * H[2][1]) -
                           H[0][1] * (H[1][0] * H[2][2] - H[1][2] * H[2][0]) +
                           H[0][2] * (H[1][0] * H[2][1] - H[1][1] * H[2][0]);
        if (std::abs(det) < 1e-15) return false;
        const double b[3] = {-dD[0], -dD[1], -dD[2]};
        for (int c = 0; c < 3; ++c) {
            double M[3][3];
            for (int r = 0; r < 3; ++r) {
                for (int q = 0; q < 3; ++q) M[r][q] = (q == c) ? b[r] : H[r][q];
            }
            X[c] = (M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
                    M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0])) / det;
        }
        xc = X[0];
        xr = X[1];
        xi = X[2];
        if (std::abs(xi) < 0.5 && std::abs(xr) < 0.5 && std::abs(xc) < 0.5) break;
        if (std::abs(xi) > 1e6 || std::abs(xr) > 1e6 || std::abs(xc) > 1e6) return false;
        x += static_cast<int>(std::lround(xc));
        y += static_cast<int>(std::lround(xr));
        layer += static_cast<int>(std::lround(xi));
        if (layer < 1 || layer > s || x < kImageBorder || x >= w - kImageBorder || y < kImageBorder ||
            y >= h - kImageBorder) {
            return false;
        }
    }
    if (step >= kMaxInterpSteps) return false;

    {
        const FloatPlane& img = oct.dog[layer];
        const double t = dD[0] * X[0] + dD[1] * X[1] + dD[2] * X[2];
        const double contr = img.at(x, y) + t * 0.5;
        if (std::abs(contr) * s < cfg.contrast_threshold) return false;

        const double v2 = img.at(x, y) * 2.0;
        const double dxx = img.at(x + 1, y) + img.at(x - 1, y) - v2;
        const double dyy = img.at(x, y + 1) + img.at(x, y - 1) - v2;
        const double dxy = (img.at(x + 1, y + 1) - img.at(x - 1, y + 1) - img.at(x + 1, y - 1) + img.at(x - 1, y - 1)) * 0.25;
        const double tr = dxx + dyy;
        const double det = dxx * dyy - dxy * dxy;
        const double r = cfg.edge_threshold;
        if (det <= 0 || tr * tr * r >= (r + 1) * (r + 1) * det) return false;
    }
    kp.x = x;
    kp.y = y;
    kp.layer = layer;
    kp.xi = xi;
    kp.xc = xc;
    kp.xr = xr;
    return true;
}

std::vector<double> dominant_orientations(const GradientPlane& g, int cx, int cy, double scl_octv) {
    const int radius = static_cast<int>(std::lround(kOriRadiusFactor * scl_octv));
    const double sigma = kOriSigmaFactor * scl_octv;
    const double expf_scale = -1.0 / (2.0 * sigma * sigma);
    std::array<double, kOriBins> hist{};
    const int w = g.magnitude.width;
    const int h = g.magnitude.height;
    for (int dy = -radius; dy <= radius; ++dy) {
        const int y = cy + dy;
        if (y <= 0 || y >= h - 1) continue;
        for (int dx = -radius; dx <= radius; ++dx) {
            const int x = cx + dx;
            if (x <= 0 || x >= w - 1) continue;
            const double weight = std::exp((dx * dx + dy * dy) * expf_scale);
            int bin = static_cast<int>(std::lround(g.angle.at(x, y) * kOriBins / 360.0));
            if (bin >= kOriBins) bin -= kOriBins;
            if (bin < 0) bin += kOriBins;
            hist[bin] += weight * g.magnitude.at(x, y);
        }
    }
    std::array<double, kOriBins> smooth{};
    for (int i = 0; i < kOriBins; ++i) {
        auto at = [&](int j) { return hist[(j + kOriBins) % kOriBins]; };
        smooth[i] = (at(i - 2) + at(i + 2)) * (1.0 / 16) + (at(i - 1) + at(i + 1)) * (4.0 / 16) + at(i) * (6.0 / 16);
    }
    const double maxval = *std::max_element(smooth.begin(), smooth.end());
    std::vector<double> out;
    if (maxval <= 0) return out;
    const double thr = maxval * kOriPeakRatio;
    for (int j = 0; j < kOriBins; ++j) {
        const int l = (j + kOriBins - 1) % kOriBins;
        const int r = (j + 1) % kOriBins;
        if (smooth[j] > smooth[l] && smooth[j] > smooth[r] && smooth[j] >= thr) {
            double bin = j + 0.5 * (smooth[l] - smooth[r]) / (smooth[l] - 2 * smooth[j] + smooth[r]);
            if (bin < 0) bin += kOriBins;
            if (bin >= kOriBins) bin -= kOriBins;
            out.push_back(wrap_unsigned_deg(bin * 360.0 / kOriBins));
        }
    }
    return out;
}

std::vector<float> compute_descriptor(const GradientPlane& g, double px, double py, double ori_deg, double scl) {
    constexpr int d = kDescWidth;
    constexpr int n = kDescBins;
    const double hist_width = kDescSclFactor * scl;
    const int cx = static_cast<int>(std::lround(px));
    const int cy = static_cast<int>(std::lround(py));
    const int w = g.magnitude.width;
    const int h = g.magnitude.height;
    int radius = static_cast<int>(std::lround(hist_width * std::numbers::sqrt2 * (d + 1) * 0.5));
    radius = std::min(radius, static_cast<int>(std::sqrt(static_cast<double>(w) * w + static_cast<double>(h) * h)));
    const double ori_rad = deg_to_rad(ori_deg);
    const double cos_t = std::cos(ori_rad) / hist_width;
    const double sin_t = std::sin(ori_rad) / hist_width;
    const double bins_per_deg = n / 360.0;
    const double exp_scale = -1.0 / (d * d * 0.5);

    std::vector<float> hist((d + 2) * (d + 2) * (n + 2), 0.0f);
    auto H = [&](int r, int c, int o) -> float& { return hist[((r * (d + 2)) + c) * (n + 2) + o]; };

    for (int i = -radius; i <= radius; ++i) {
        const int y = cy + i;
        if (y <= 0 || y >= h - 1) continue;
        for (int j = -radius; j <= radius; ++j) {
            const int x = cx + j;
            if (x <= 0 || x >= w - 1) continue;
            // offset expressed in the keypoint frame, in histogram-cell units
            const double c_rot = j * cos_t + i * sin_t;
            const double r_rot = -j * sin_t + i * cos_t;
            const double rbin = r_rot + d / 2.0 - 0.5;
            const double cbin = c_rot + d / 2.0 - 0.5;
            if (rbin <= -1 || rbin >= d || cbin <= -1 || cbin >= d) continue;

            double obin = (g.angle.at(x, y) - ori_deg) * bins_per_deg;
            const double weight = std::exp((c_rot * c_rot + r_rot * r_rot) * exp_scale);
            const double mag = g.magnitude.at(x, y) * weight;

            const int r0 = static_cast<int>(std::floor(rbin));
            const int c0 = static_cast<int>(std::floor(cbin));
            int o0 = static_cast<int>(std::floor(obin));
            const double fr = rbin - r0;
            const double fc = cbin - c0;
            double fo = obin - o0;
            o0 %= n;
            if (o0 < 0) o0 += n;
            if (fo < 0) fo = 0;

            const double v_r1 = mag * fr, v_r0 = mag - v_r1;
            const double v_rc11 = v_r1 * fc, v_rc10 = v_r1 - v_rc11;
            const double v_rc01 = v_r0 * fc, v_rc00 = v_r0 - v_rc01;
            const double v_rco111 = v_rc11 * fo, v_rco110 = v_rc11 - v_rco111;
            const double v_rco101 = v_rc10 * fo, v_rco100 = v_rc10 - v_rco101;
            const double v_rco011 = v_rc01 * fo, v_rco010 = v_rc01 - v_rco011;
            const double v_rco001 = v_rc00 * fo, v_rco000 = v_rc00 - v_rco001;

            const int rr = r0 + 1, cc = c0 + 1;
            H(rr, cc, o0) += static_cast<float>(v_rco000);
            H(rr, cc, o0 + 1) += static_cast<float>(v_rco001);
            H(rr, cc + 1, o0) += static_cast<float>(v_rco010);
            H(rr, cc + 1, o0 + 1) += static_cast<float>(v_rco011);
            H(rr + 1, cc, o0) += static_cast<float>(v_rco100);
            H(rr + 1, cc, o0 + 1) += static_cast<float>(v_rco101);
            H(rr + 1, cc + 1, o0) += static_cast<float>(v_rco110);
            H(rr + 1, cc + 1, o0 + 1) += static_cast<float>(v_rco111);
        }
    }

    std::vector<float> desc(d * d * n);
    for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) {
            // fold the circular orientation overflow bin back
            H(r + 1, c + 1, 0) += H(r + 1, c + 1, n);
            for (int o = 0; o < n; ++o) desc[(r * d + c) * n + o] = H(r + 1, c + 1, o);
        }
    }
    double nrm = 0;
    for (float v : desc) nrm += static_cast<double>(v) * v;
    const float thr = static_cast<float>(std::sqrt(nrm)) * kDescMagThreshold;
    nrm = 0;
    for (float& v : desc) {
        v = std::min(v, thr);
        nrm += static_cast<double>(v) * v;
    }
    nrm = std::sqrt(nrm);
    if (nrm > 0) {
        for (float& v : desc) v = static_cast<float>(v / nrm);
    }
    return desc;
}

}  // namespace

FeatureSet extract_features(const RasterImage& img, const ExtractorConfig& cfg, std::string source_id) {
    if (img.empty()) throw InvalidArgument("extract_features: empty image");
    if (cfg.octaves < 1 || cfg.scales_per_octave < 1) throw InvalidArgument("extract_features: bad octave config");

    FeatureSet fs;
    fs.source_id = std::move(source_id);
    fs.image_w = img.width();
    fs.image_h = img.height();
    fs.descriptor_len = kDescWidth * kDescWidth * kDescBins;

    const RasterImage gray = to_grayscale(img);
    FloatPlane base(gray.width(), gray.height());
    for (std::size_t i = 0; i < base.data.size(); ++i) base.data[i] = gray.data()[i] / 255.0f;
    const int up = cfg.upsample ? 2 : 1;
    if (cfg.upsample) base = resize_bilinear(base, 2 * base.width, 2 * base.height);
    const double blur = cfg.assumed_blur * up;
    const double sig_diff = std::sqrt(std::max(cfg.base_sigma * cfg.base_sigma - blur * blur, 0.01));
    base = gaussian_blur(base, sig_diff, static_cast<int>(std::ceil(4.0 * sig_diff)));

    const int min_dim = std::min(img.width(), img.height());
    if (min_dim < 2 * kImageBorder + 3) return fs;
    const int max_octaves = std::max(1, static_cast<int>(std::floor(std::log2(min_dim * up))) - 3);
    const int n_octaves = std::min(cfg.octaves + (up - 1), max_octaves);

    const auto pyr = build_pyramid(base, cfg, n_octaves);
    const int s = cfg.scales_per_octave;
    const float prelim_thr = static_cast<float>(0.5 * cfg.contrast_threshold / s);

    for (int o = 0; o < n_octaves; ++o) {
        const Octave& oct = pyr[o];
        const int w = oct.dog[0].width;
        const int h = oct.dog[0].height;
        const double octave_scale = std::ldexp(1.0, o) / up;
        // pixel k of the upsampled grid sits at (k + 0.5) / 2 - 0.5 in the input
        const double shift = cfg.upsample ? -0.25 : 0.0;
        for (int layer = 1; layer <= s; ++layer) {
            const FloatPlane& cur = oct.dog[layer];
            for (int y = kImageBorder; y < h - kImageBorder; ++y) {
                for (int x = kImageBorder; x < w - kImageBorder; ++x) {
                    const float v = cur.at(x, y);
                    if (std::abs(v) <= prelim_thr) continue;
                    if (!is_extremum(oct, layer, x, y, v)) continue;
                    RawKeypoint kp{o, layer, x, y, 0, 0, 0};
                    if (!refine_extremum(oct, cfg, kp)) continue;

                    const double scl_octv = cfg.base_sigma * std::pow(2.0, (kp.layer + kp.xi) / s);
                    const double px = kp.x + kp.xc;
                    const double py = kp.y + kp.xr;
                    const GradientPlane& g = oct.grad[kp.layer];
                    const auto oris = dominant_orientations(g, kp.x, kp.y, scl_octv);
                    for (double ori : oris) {
                        FeaturePoint fp;
                        fp.x = px * octave_scale + shift;
                        fp.y = py * octave_scale + shift;
                        if (fp.x < 0 || fp.y < 0 || fp.x > fs.image_w - 1 || fp.y > fs.image_h - 1) continue;
                        fp.scale = scl_octv * octave_scale;
                        fp.orientation = ori;
                        fp.descriptor = compute_descriptor(g, px, py, ori, scl_octv);
                        const PointAppearance app = sample_point_appearance(img, fp.x, fp.y);
                        fp.color = app.color;
                        fp.luminance = app.luminance;
                        fs.points.push_back(std::move(fp));
                    }
                }
            }
        }
    }
    return fs;
}

}  // namespace shelfscan

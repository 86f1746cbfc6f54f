#include "canvas.hpp"
#include "shelfscan/error.hpp"
#include "shelfscan/evalkit.hpp"

#include <json.hpp>

#include <numbers>

namespace shelfscan {

using detail::Rgb;
using nlohmann::json;

// =============================================================================
// Ground truth JSON
// =============================================================================

std::string truth_to_json(const GroundTruth& truth, int indent) {
    json places = json::array();
    for (const Placement& p : truth.placements) {
        places.push_back({{"pattern_id", p.pattern_id},
                          {"center", {p.center_x, p.center_y}},
                          {"scale", p.scale},
                          {"rotation", p.rotation},
                          {"pattern_size", {p.pattern_w, p.pattern_h}}});
    }
    const json j = {{"scene_id", truth.scene_id},
                    {"width", truth.width},
                    {"height", truth.height},
                    {"placements", std::move(places)}};
    return j.dump(indent);
}

GroundTruth truth_from_json(const std::string& text) {
    GroundTruth t;
    try {
        const json j = json::parse(text);
        t.scene_id = j.at("scene_id").get<std::string>();
        t.width = j.at("width").get<int>();
        t.height = j.at("height").get<int>();
        for (const json& p : j.at("placements")) {
            Placement pl;
            pl.pattern_id = p.at("pattern_id").get<std::string>();
            pl.center_x = p.at("center").at(0).get<double>();
            pl.center_y = p.at("center").at(1).get<double>();
            pl.scale = p.at("scale").get<double>();
            pl.rotation = p.at("rotation").get<double>();
            pl.pattern_w = p.at("pattern_size").at(0).get<int>();
            pl.pattern_h = p.at("pattern_size").at(1).get<int>();
            t.placements.push_back(std::move(pl));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("ground truth: ") + e.what());
    }
    for (const Placement& p : t.placements) {
        if (p.center_x < 0 || p.center_y < 0 || p.center_x > t.width - 1 || p.center_y > t.height - 1) {
            throw ParseError("ground truth: placement of '" + p.pattern_id + "' lies outside the scene");
        }
    }
    return t;
}

// =============================================================================
// Scene synthesis
// =============================================================================

void validate(const SceneSpec& s) {
    if (s.width < 16 || s.height < 16) throw InvalidArgument("scene spec: scene must be at least 16x16");
    if (s.placements < 0 || s.distractors < 0 || s.decoys < 0) throw InvalidArgument("scene spec: negative count");
    if (!(s.scale_min >= 0.5 && s.scale_max <= 2.0 && s.scale_min <= s.scale_max)) {
        throw InvalidArgument("scene spec: scale range must lie within [0.5, 2]");
    }
    if (!(s.rotation_min >= -30.0 && s.rotation_max <= 30.0 && s.rotation_min <= s.rotation_max)) {
        throw InvalidArgument("scene spec: rotation range must lie within [-30, 30] degrees");
    }
    if (!(s.noise_sigma >= 0)) throw InvalidArgument("scene spec: noise_sigma must be non-negative");
    if (!(s.gradient_amplitude >= 0 && s.gradient_amplitude < 1)) {
        throw InvalidArgument("scene spec: gradient_amplitude must be in [0, 1)");
    }
    for (double c : s.color_cast) {
        if (!(c > 0)) throw InvalidArgument("scene spec: color_cast factors must be positive");
    }
    if (!(s.product_blur >= 0)) throw InvalidArgument("scene spec: product_blur must be non-negative");
    if (!(s.product_contrast > 0 && s.product_contrast <= 1)) {
        throw InvalidArgument("scene spec: product_contrast must be in (0, 1]");
    }
    if (!(s.texture >= 0)) throw InvalidArgument("scene spec: texture must be non-negative");
}

namespace {

/// Smooth value noise, summed over octaves, roughly in [-1, 1].
class ValueNoise {
public:
    ValueNoise(std::mt19937_64& rng, int cells) : cells_(cells), grid_((cells + 1) * (cells + 1)) {
        std::uniform_real_distribution<> u(-1.0, 1.0);
        for (double& g : grid_) g = u(rng);
    }
    double at(double fx, double fy) const {  // fx, fy in [0, 1]
        const double gx = fx * cells_, gy = fy * cells_;
        const int ix = std::min(cells_ - 1, static_cast<int>(gx));
        const int iy = std::min(cells_ - 1, static_cast<int>(gy));
        const double tx = smooth(gx - ix), ty = smooth(gy - iy);
        const auto g = [&](int x, int y) { return grid_[static_cast<std::size_t>(y) * (cells_ + 1) + x]; };
        const double a = g(ix, iy) + (g(ix + 1, iy) - g(ix, iy)) * tx;
        const double b = g(ix, iy + 1) + (g(ix + 1, iy + 1) - g(ix, iy + 1)) * tx;
        return a + (b - a) * ty;
    }

private:
    static double smooth(double t) { return t * t * (3 - 2 * t); }
    int cells_;
    std::vector<double> grid_;
};

void paint_background(RasterImage& img, const SceneSpec& spec, std::mt19937_64& rng) {
    std::uniform_real_distribution<> u(0.0, 1.0);
    const Rgb base = detail::hsl_color(u(rng) * 360, 0.15 + 0.25 * u(rng), 0.45 + 0.2 * u(rng));
    std::array<std::vector<ValueNoise>, 3> noise;
    for (auto& octaves : noise) {
        for (int cells : {4, 9, 21, 47}) octaves.emplace_back(rng, cells);
    }
    const int w = img.width(), h = img.height();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double fx = x / double(w - 1), fy = y / double(h - 1);
            for (int c = 0; c < 3; ++c) {
                double n = 0, amp = 1;
                for (const ValueNoise& o : noise[c]) {
                    n += amp * o.at(fx, fy);
                    amp *= 0.55;
                }
                const double v = base[c] + spec.texture * 45.0 * n;
                img.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        }
    }
    if (!spec.shelf_lines) return;
    // shelf edges with price tags
    const int shelves = 3;
    for (int s = 1; s <= shelves; ++s) {
        const double y0 = s * h / double(shelves + 1) + (u(rng) - 0.5) * 20;
        detail::fill_rect(img, 0, y0, w, y0 + 9, {45, 40, 38});
        detail::fill_rect(img, 0, y0 + 9, w, y0 + 13, {190, 185, 175});
        for (double x = u(rng) * 60; x < w - 40; x += 70 + u(rng) * 90) {
            detail::fill_rect(img, x, y0 + 1, x + 34, y0 + 8, {235, 235, 225});
            for (int b = 0; b < 4; ++b) {
                const double bx = x + 3 + b * 7 + u(rng) * 3;
                detail::fill_rect(img, bx, y0 + 2, bx + 2, y0 + 7, {30, 30, 30});
            }
        }
    }
}

struct Item {
    const RasterImage* image = nullptr;
    double cx = 0, cy = 0, scale = 1, rotation = 0;
};

BoxD item_box(int w, int h, double cx, double cy, double scale, double rotation) {
    Envelope e{cx, cy, w * scale, h * scale, rotation};
    return e.bounding_box();
}

bool overlaps(const BoxD& a, const BoxD& b, double margin) {
    return a.x0 < b.x1 + margin && b.x0 < a.x1 + margin && a.y0 < b.y1 + margin && b.y0 < a.y1 + margin;
}

double sample(const RasterImage& img, double u, double v, int c) {
    u = std::clamp(u, 0.0, img.width() - 1.0);
    v = std::clamp(v, 0.0, img.height() - 1.0);
    const int x0 = std::min(static_cast<int>(u), img.width() - 2 < 0 ? 0 : img.width() - 2);
    const int y0 = std::min(static_cast<int>(v), img.height() - 2 < 0 ? 0 : img.height() - 2);
    const int x1 = std::min(x0 + 1, img.width() - 1), y1 = std::min(y0 + 1, img.height() - 1);
    const double tx = u - x0, ty = v - y0;
    const double a = img.at(x0, y0, c) + (img.at(x1, y0, c) - img.at(x0, y0, c)) * tx;
    const double b = img.at(x0, y1, c) + (img.at(x1, y1, c) - img.at(x0, y1, c)) * tx;
    return a + (b - a) * ty;
}

void composite(RasterImage& scene, const Item& item) {
    const RasterImage& src = *item.image;
    const double s = item.scale;
    RasterImage filtered;
    const RasterImage* use = &src;
    if (s < 1.0) {  // anti-alias before shrinking
        filtered = gaussian_blur(src, 0.5 * std::sqrt(1.0 / (s * s) - 1.0));
        use = &filtered;
    }
    const int w = src.width(), h = src.height();
    const double ax = (w - 1) / 2.0, ay = (h - 1) / 2.0;
    const double rad = deg_to_rad(item.rotation);
    const double cs = std::cos(rad), sn = std::sin(rad);
    const BoxD bb = item_box(w, h, item.cx, item.cy, s, item.rotation);
    const int x0 = std::max(0, static_cast<int>(std::floor(bb.x0)) - 1);
    const int y0 = std::max(0, static_cast<int>(std::floor(bb.y0)) - 1);
    const int x1 = std::min(scene.width() - 1, static_cast<int>(std::ceil(bb.x1)) + 1);
    const int y1 = std::min(scene.height() - 1, static_cast<int>(std::ceil(bb.y1)) + 1);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - item.cx, dy = y - item.cy;
            const double u = (cs * dx + sn * dy) / s + ax;
            const double v = (-sn * dx + cs * dy) / s + ay;
            const double edge = std::min({u + 0.5, w - 0.5 - u, v + 0.5, h - 0.5 - v});
            const double alpha = std::clamp(edge * s + 0.5, 0.0, 1.0);
            if (alpha <= 0) continue;
            const Rgb c{sample(*use, u, v, 0), sample(*use, u, v, 1), sample(*use, u, v, 2)};
            detail::put(scene, x, y, c, alpha);
        }
    }
}

RasterImage degrade(const RasterImage& img, const SceneSpec& spec) {
    RasterImage out = img.channels() == 3 ? img : RasterImage(img.width(), img.height(), 3);
    if (img.channels() == 1) {
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x)
                for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y);
    }
    if (spec.product_contrast < 1.0) {
        for (int c = 0; c < 3; ++c) {
            double mean = 0;
            for (int y = 0; y < out.height(); ++y)
                for (int x = 0; x < out.width(); ++x) mean += out.at(x, y, c);
            mean /= double(out.width()) * out.height();
            for (int y = 0; y < out.height(); ++y) {
                for (int x = 0; x < out.width(); ++x) {
                    const double v = mean + (out.at(x, y, c) - mean) * spec.product_contrast;
                    out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
                }
            }
        }
    }
    if (spec.product_blur > 0) out = gaussian_blur(out, spec.product_blur);
    return out;
}

}  // namespace

std::pair<RasterImage, GroundTruth> generate_scene(const SceneSpec& spec, std::span<const NamedImage> patterns,
                                                   std::span<const NamedImage> distractors,
                                                   std::span<const NamedImage> decoys) {
    validate(spec);
    if (spec.placements > 0 && patterns.empty()) throw InvalidArgument("generate_scene: placements need patterns");
    for (const auto* pool : {&patterns, &distractors, &decoys}) {
        for (const NamedImage& n : *pool) {
            if (n.image.empty()) throw InvalidArgument("generate_scene: empty image '" + n.id + "'");
        }
    }
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<> u(0.0, 1.0);
    RasterImage scene(spec.width, spec.height, 3);
    paint_background(scene, spec, rng);

    GroundTruth truth;
    truth.scene_id = spec.scene_id;
    truth.width = spec.width;
    truth.height = spec.height;

    std::vector<BoxD> taken;
    constexpr int kTries = 400;
    constexpr double kMargin = 4.0;
    // returns false when no free spot was found
    const auto place = [&](const RasterImage& img, Item& item) {
        const int w = img.width(), h = img.height();
        const double ax = (w - 1) / 2.0, ay = (h - 1) / 2.0;
        for (int t = 0; t < kTries; ++t) {
            const double s = spec.scale_min + (spec.scale_max - spec.scale_min) * u(rng);
            const double r = spec.rotation_min + (spec.rotation_max - spec.rotation_min) * u(rng);
            const Envelope probe{0, 0, w * s, h * s, r};
            const BoxD pb = probe.bounding_box();
            const double hw = pb.x1, hh = pb.y1;
            if (2 * hw > spec.width - 2 || 2 * hh > spec.height - 2) continue;
            double cx = hw + 1 + (spec.width - 2 - 2 * hw) * u(rng);
            double cy = hh + 1 + (spec.height - 2 - 2 * hh) * u(rng);
            // keep the pattern's pixel grid aligned with the scene's
            cx = std::round(cx - ax) + ax;
            cy = std::round(cy - ay) + ay;
            const BoxD bb = item_box(w, h, cx, cy, s, r);
            if (bb.x0 < 0 || bb.y0 < 0 || bb.x1 > spec.width - 1 || bb.y1 > spec.height - 1) continue;
            if (std::any_of(taken.begin(), taken.end(), [&](const BoxD& o) { return overlaps(o, bb, kMargin); })) {
                continue;
            }
            taken.push_back(bb);
            item = {&img, cx, cy, s, r};
            return true;
        }
        return false;
    };

    std::vector<RasterImage> prepared;
    prepared.reserve(patterns.size() + distractors.size() + decoys.size());
    for (const NamedImage& p : patterns) prepared.push_back(degrade(p.image, spec));
    const std::size_t distractor_base = prepared.size();
    for (const NamedImage& d : distractors) prepared.push_back(degrade(d.image, spec));
    const std::size_t decoy_base = prepared.size();
    for (const NamedImage& d : decoys) prepared.push_back(degrade(d.image, spec));

    std::vector<Item> items;
    const std::size_t fixed = patterns.empty() ? 0 : static_cast<std::size_t>(u(rng) * patterns.size());
    for (int i = 0; i < spec.placements; ++i) {
        const std::size_t k =
            spec.same_pattern ? fixed : std::min(patterns.size() - 1, static_cast<std::size_t>(u(rng) * patterns.size()));
        Item item;
        if (!place(prepared[k], item)) {
            throw InvalidArgument("generate_scene: placement overflow, no room for placement " + std::to_string(i));
        }
        items.push_back(item);
        truth.placements.push_back({patterns[k].id, item.cx, item.cy, item.scale, item.rotation,
                                    patterns[k].image.width(), patterns[k].image.height()});
    }
    const auto add_untracked = [&](std::size_t base, std::size_t pool, int count) {
        for (int i = 0; i < count && pool > 0; ++i) {
            const std::size_t k = base + std::min(pool - 1, static_cast<std::size_t>(u(rng) * pool));
            Item item;
            if (place(prepared[k], item)) items.push_back(item);
        }
    };
    add_untracked(distractor_base, distractors.size(), spec.distractors);
    add_untracked(decoy_base, decoys.size(), spec.decoys);

    for (const Item& item : items) composite(scene, item);

    // illumination: global cast, linear brightness ramp, sensor noise
    const bool lit = spec.gradient_amplitude > 0 || spec.color_cast != std::array<double, 3>{1.0, 1.0, 1.0};
    if (lit || spec.noise_sigma > 0) {
        const double phi = u(rng) * 2 * std::numbers::pi;
        const double half_diag = 0.5 * std::hypot(spec.width, spec.height);
        std::normal_distribution<> noise(0.0, spec.noise_sigma > 0 ? spec.noise_sigma : 1.0);
        for (int y = 0; y < spec.height; ++y) {
            for (int x = 0; x < spec.width; ++x) {
                const double t = ((x - spec.width / 2.0) * std::cos(phi) + (y - spec.height / 2.0) * std::sin(phi)) /
                                 half_diag;
                const double gain = 1.0 + spec.gradient_amplitude * t;
                for (int c = 0; c < 3; ++c) {
                    double v = scene.at(x, y, c) * gain * spec.color_cast[c];
                    if (spec.noise_sigma > 0) v += noise(rng);
                    scene.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
                }
            }
        }
    }
    return {std::move(scene), std::move(truth)};
}

}  // namespace shelfscan

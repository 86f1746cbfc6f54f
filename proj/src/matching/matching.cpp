#include "shelfscan/error.hpp"
#include "shelfscan/matching.hpp"

#include <algorithm>
#include <cmath>

namespace shelfscan {

void validate(const MatchConfig& cfg) {
    if (!(cfg.scale_quotient_min > 0 && cfg.scale_quotient_min < cfg.scale_quotient_max)) {
        throw InvalidArgument("match config: scale quotient range must satisfy 0 < min < max");
    }
    if (!(cfg.hue_threshold > 0)) throw InvalidArgument("match config: hue threshold must be positive");
    if (!(cfg.lightness_min <= cfg.lightness_max)) throw InvalidArgument("match config: lightness range is empty");
    if (!(cfg.rgb_spread_min >= 0)) throw InvalidArgument("match config: rgb spread must be non-negative");
    if (cfg.index.trees < 1 || cfg.index.checks < 0) throw InvalidArgument("match config: bad index parameters");
}

std::vector<RawMatch> match_descriptors(const FeatureSet& scene, const DescriptorIndex& index) {
    std::vector<RawMatch> out;
    out.reserve(scene.size());
    for (std::size_t i = 0; i < scene.points.size(); ++i) {
        const NeighborResult nn = index.nearest(scene.points[i].descriptor);
        out.push_back({static_cast<int>(i), nn.index, nn.distance});
    }
    return out;
}

double distance_threshold(std::span<const RawMatch> matches) {
    if (matches.empty()) throw InvalidArgument("distance_threshold: empty match list");
    const auto [lo, hi] = std::minmax_element(matches.begin(), matches.end(),
                                              [](const RawMatch& a, const RawMatch& b) { return a.distance < b.distance; });
    return (lo->distance + hi->distance) / 2.0;
}

double adjacency(double distance, double threshold) {
    const double q = distance / threshold;
    return 1.0 - q * q;
}

double hue_distance(double h1, double h2) {
    const double d = std::abs(wrap_unsigned_deg(h1) - wrap_unsigned_deg(h2));
    return std::min(d, 360.0 - d);
}

namespace {

bool color_filter_applies(const ColorSample& c, const MatchConfig& cfg) {
    const int spread = std::max({std::abs(c.r - c.g), std::abs(c.r - c.b), std::abs(c.g - c.b)});
    return c.l >= cfg.lightness_min && c.l <= cfg.lightness_max && spread > cfg.rgb_spread_min;
}

}  // namespace

bool color_filter(const FeaturePoint& pattern_pt, const FeaturePoint& scene_pt, const MatchConfig& cfg) {
    if (!cfg.color_filter) return true;
    if (!color_filter_applies(pattern_pt.color, cfg) || !color_filter_applies(scene_pt.color, cfg)) return true;
    return hue_distance(pattern_pt.color.h, scene_pt.color.h) <= cfg.hue_threshold;
}

std::vector<Vote> make_votes(const FeatureSet& scene, const FeatureSet& pattern, const DescriptorIndex& index,
                             Point2d pattern_anchor, const MatchConfig& cfg, VoteStats* stats) {
    validate(cfg);
    VoteStats local;
    VoteStats& st = stats ? *stats : local;
    st = {};
    std::vector<Vote> votes;
    if (scene.empty() || pattern.empty()) return votes;
    if (index.size() != static_cast<int>(pattern.size())) {
        throw InvalidArgument("make_votes: index was not built from this pattern");
    }

    const auto matches = match_descriptors(scene, index);
    st.raw_matches = matches.size();
    const double thr = distance_threshold(matches);
    st.threshold = thr;

    for (const RawMatch& m : matches) {
        if (!(m.distance < thr)) continue;
        ++st.after_distance;
        const FeaturePoint& sp = scene.points[m.scene_idx];
        const FeaturePoint& pp = pattern.points[m.pattern_idx];
        if (!color_filter(pp, sp, cfg)) continue;
        ++st.after_color;
        const double q = sp.scale / pp.scale;
        if (!(q > cfg.scale_quotient_min && q < cfg.scale_quotient_max)) continue;
        ++st.after_scale;

        Vote v;
        v.pattern_idx = m.pattern_idx;
        v.scene_idx = m.scene_idx;
        v.descriptor_distance = m.distance;
        v.adjacency = adjacency(m.distance, thr);
        v.scale_quotient = q;
        v.rotation_delta = wrap_signed_deg(sp.orientation - pp.orientation);
        v.feature_x = sp.x;
        v.feature_y = sp.y;

        const double rad = deg_to_rad(v.rotation_delta);
        const double ox = pattern_anchor.x - pp.x;
        const double oy = pattern_anchor.y - pp.y;
        v.scene_x = sp.x + q * (ox * std::cos(rad) - oy * std::sin(rad));
        v.scene_y = sp.y + q * (ox * std::sin(rad) + oy * std::cos(rad));
        if (!(v.scene_x >= 0 && v.scene_y >= 0 && v.scene_x < scene.image_w && v.scene_y < scene.image_h)) continue;
        votes.push_back(v);
    }
    st.emitted = votes.size();
    return votes;
}

std::vector<Vote> make_votes(const FeatureSet& scene, const FeatureSet& pattern, const MatchConfig& cfg) {
    if (scene.empty() || pattern.empty()) return {};
    const DescriptorIndex index(pattern, cfg.index);
    const Point2d anchor{(pattern.image_w - 1) / 2.0, (pattern.image_h - 1) / 2.0};
    return make_votes(scene, pattern, index, anchor, cfg);
}

}  // namespace shelfscan

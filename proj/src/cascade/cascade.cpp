#include "shelfscan/cascade.hpp"
#include "shelfscan/error.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace shelfscan {

std::string_view filter_name(FilterId id) {
    switch (id) {
        case FilterId::VoteCount: return "vote_count";
        case FilterId::AdjacencySum: return "adjacency_sum";
        case FilterId::ScaleVariance: return "scale_variance";
        case FilterId::RotationVariance: return "rotation_variance";
        case FilterId::BinaryLuminance: return "binary_luminance";
        case FilterId::GlobalNcc: return "global_ncc";
    }
    return "unknown";
}

void validate(const CascadeConfig& cfg) {
    if (cfg.min_votes < 0) throw InvalidArgument("cascade config: min_votes must be non-negative");
    if (!(cfg.adjacency_divisor > 0)) throw InvalidArgument("cascade config: adjacency_divisor must be positive");
    if (!(cfg.scale_var_factor > 0) || !(cfg.rot_var_factor > 0)) {
        throw InvalidArgument("cascade config: variance factors must be positive");
    }
    if (!(cfg.hamming_reject_frac > 0 && cfg.hamming_reject_frac < 1)) {
        throw InvalidArgument("cascade config: hamming_reject_frac must be in (0, 1)");
    }
    if (!(cfg.ncc_threshold > 0 && cfg.ncc_threshold < 1)) {
        throw InvalidArgument("cascade config: ncc_threshold must be in (0, 1)");
    }
    if (cfg.ncc_patch < 2) throw InvalidArgument("cascade config: ncc_patch must be at least 2");
}

namespace {

FilterVerdict verdict(bool accepted, FilterId id, double measured, double threshold) {
    FilterVerdict v;
    v.accepted = accepted;
    if (!accepted) v.rejecting_filter = id;
    v.measured_value = measured;
    v.threshold_value = threshold;
    return v;
}

RasterImage as_rgb(const RasterImage& img) {
    if (img.channels() == 3) return img;
    RasterImage out(img.width(), img.height(), 3);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y);
        }
    }
    return out;
}

}  // namespace

FilterVerdict f1_vote_count(const VoteGroup& group, const CascadeConfig& cfg) {
    const auto n = static_cast<double>(group.size());
    return verdict(n > cfg.min_votes, FilterId::VoteCount, n, cfg.min_votes);
}

FilterVerdict f2_adjacency_sum(const VoteGroup& group, std::size_t pattern_feature_count, const CascadeConfig& cfg) {
    const double thr = static_cast<double>(pattern_feature_count) / cfg.adjacency_divisor;
    return verdict(group.adjacency_sum >= thr, FilterId::AdjacencySum, group.adjacency_sum, thr);
}

FilterVerdict f3_scale_variance(const VoteGroup& group, const CascadeConfig& cfg) {
    const double ref = cfg.scale_reference == ScaleVarianceReference::MeanOfSquares
                           ? group.scale_mean_square
                           : group.mean_scale_quotient * group.mean_scale_quotient;
    const double thr = cfg.scale_var_factor * ref;
    if (group.size() < 2) return verdict(true, FilterId::ScaleVariance, 0.0, thr);
    return verdict(group.scale_variance <= thr, FilterId::ScaleVariance, group.scale_variance, thr);
}

FilterVerdict f4_rotation_variance(const VoteGroup& group, const CascadeConfig& cfg) {
    // unit vectors have mean square 1, so the reference term equals the factor
    const double thr = cfg.rot_var_factor;
    constexpr double kDegenerateResultant = 1e-6;
    if (group.votes.empty() || group.rotation_resultant < kDegenerateResultant) {
        return verdict(false, FilterId::RotationVariance, 1.0, thr);
    }
    return verdict(group.rotation_variance <= thr, FilterId::RotationVariance, group.rotation_variance, thr);
}

FilterVerdict f5_binary_luminance(const VoteGroup& group, const FeatureSet& pattern, const FeatureSet& scene,
                                  const CascadeConfig& cfg) {
    const std::size_t n = group.size();
    // enumerate pairs in luminance order so ties cannot make the result depend on vote order
    std::vector<std::pair<int, int>> lum(n);
    for (std::size_t i = 0; i < n; ++i) {
        lum[i] = {pattern.points.at(group.votes[i].pattern_idx).luminance,
                  scene.points.at(group.votes[i].scene_idx).luminance};
    }
    std::sort(lum.begin(), lum.end());
    std::vector<int> lp(n), ls(n);
    for (std::size_t i = 0; i < n; ++i) std::tie(lp[i], ls[i]) = lum[i];
    std::size_t pairs = 0, differing = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool bit_scene = ls[i] > ls[j];
            const bool bit_pattern = lp[i] > lp[j];
            differing += bit_scene != bit_pattern;
            ++pairs;
        }
    }
    const double frac = pairs ? static_cast<double>(differing) / static_cast<double>(pairs) : 0.0;
    return verdict(!(frac > cfg.hamming_reject_frac), FilterId::BinaryLuminance, frac, cfg.hamming_reject_frac);
}

std::array<double, 3> channel_ncc(const RasterImage& a, const RasterImage& b, int patch) {
    const RasterImage ra = resize_bilinear(as_rgb(a), patch, patch);
    const RasterImage rb = resize_bilinear(as_rgb(b), patch, patch);
    std::array<double, 3> out{};
    for (int c = 0; c < 3; ++c) out[c] = ncc(ra.channel(c), rb.channel(c));
    return out;
}

FilterVerdict f6_global_ncc(const Envelope& envelope, const RasterImage& scene_img, const RasterImage& pattern_img,
                            const CascadeConfig& cfg) {
    RasterImage crop;
    try {
        crop = cfg.ncc_crop == NccCrop::Rectified ? extract_rectified(scene_img, envelope)
                                                  : extract_subimage(scene_img, envelope);
    } catch (const InvalidArgument&) {
        return verdict(false, FilterId::GlobalNcc, 0.0, cfg.ncc_threshold);
    }
    const auto values = channel_ncc(crop, pattern_img, cfg.ncc_patch);
    double measured;
    if (cfg.ncc_rule == NccChannelRule::AllChannels) {
        measured = *std::min_element(values.begin(), values.end());
    } else {
        measured = (values[0] + values[1] + values[2]) / 3.0;
    }
    return verdict(measured >= cfg.ncc_threshold, FilterId::GlobalNcc, measured, cfg.ncc_threshold);
}

std::span<const FilterId> pass_filters(int pass_id) {
    static constexpr FilterId kPass1[] = {FilterId::VoteCount, FilterId::AdjacencySum, FilterId::ScaleVariance,
                                          FilterId::RotationVariance};
    static constexpr FilterId kPass2[] = {FilterId::ScaleVariance, FilterId::RotationVariance,
                                          FilterId::BinaryLuminance, FilterId::GlobalNcc};
    if (pass_id == 1) return kPass1;
    if (pass_id == 2) return kPass2;
    throw InvalidArgument("run_cascade: pass must be 1 or 2");
}

FilterVerdict run_cascade(const VoteGroup& group, int pass_id, const CascadeContext& ctx, const CascadeConfig& cfg,
                          std::vector<FilterId>* evaluated) {
    for (FilterId id : pass_filters(pass_id)) {
        if (!cfg.is_enabled(id)) continue;
        if (evaluated) evaluated->push_back(id);
        FilterVerdict v;
        switch (id) {
            case FilterId::VoteCount:
                v = f1_vote_count(group, cfg);
                break;
            case FilterId::AdjacencySum:
                if (!ctx.pattern_features) throw InvalidArgument("run_cascade: pattern features required");
                v = f2_adjacency_sum(group, ctx.pattern_features->size(), cfg);
                break;
            case FilterId::ScaleVariance:
                v = f3_scale_variance(group, cfg);
                break;
            case FilterId::RotationVariance:
                v = f4_rotation_variance(group, cfg);
                break;
            case FilterId::BinaryLuminance:
                if (!ctx.pattern_features || !ctx.scene_features) {
                    throw InvalidArgument("run_cascade: feature sets required");
                }
                v = f5_binary_luminance(group, *ctx.pattern_features, *ctx.scene_features, cfg);
                break;
            case FilterId::GlobalNcc:
                if (!ctx.scene_image || !ctx.pattern_image) throw InvalidArgument("run_cascade: images required");
                v = f6_global_ncc(ctx.envelope, *ctx.scene_image, *ctx.pattern_image, cfg);
                break;
        }
        if (!v.accepted) return v;
    }
    return FilterVerdict{};
}

}  // namespace shelfscan

#pragma once

#include "shelfscan/aggregation.hpp"
#include "shelfscan/features.hpp"
#include "shelfscan/image.hpp"

#include <array>
#include <optional>
#include <string_view>

namespace shelfscan {

enum class FilterId {
    VoteCount = 1,
    AdjacencySum = 2,
    ScaleVariance = 3,
    RotationVariance = 4,
    BinaryLuminance = 5,
    GlobalNcc = 6,
};

inline constexpr std::array<FilterId, 6> kAllFilters = {FilterId::VoteCount,        FilterId::AdjacencySum,
                                                        FilterId::ScaleVariance,    FilterId::RotationVariance,
                                                        FilterId::BinaryLuminance, FilterId::GlobalNcc};

std::string_view filter_name(FilterId id);

/// Reference term the scale variance is compared against.
enum class ScaleVarianceReference {
    MeanOfSquares,  ///< mean(q^2)
    SquareOfMean,   ///< mean(q)^2
};

/// How f6 cuts the envelope out of the scene.
enum class NccCrop {
    Rectified,   ///< resample the rotated rectangle upright
    AxisAligned, ///< bounding-box crop, rotation ignored
};

enum class NccChannelRule {
    AllChannels,  ///< every RGB channel must pass
    MeanOfChannels,
};

struct CascadeConfig {
    int min_votes = 6;               ///< accept strictly more
    double adjacency_divisor = 200;  ///< threshold = pattern features / divisor
    double scale_var_factor = 0.6;
    double rot_var_factor = 0.6;
    double hamming_reject_frac = 0.25;
    double ncc_threshold = 0.5;
    int ncc_patch = 20;
    ScaleVarianceReference scale_reference = ScaleVarianceReference::MeanOfSquares;
    NccChannelRule ncc_rule = NccChannelRule::AllChannels;
    NccCrop ncc_crop = NccCrop::Rectified;
    /// Per-filter switch, indexed by FilterId - 1.
    std::array<bool, 6> enabled = {true, true, true, true, true, true};

    bool is_enabled(FilterId id) const { return enabled[static_cast<int>(id) - 1]; }
    void set_enabled(FilterId id, bool on) { enabled[static_cast<int>(id) - 1] = on; }
};

void validate(const CascadeConfig& cfg);

struct FilterVerdict {
    bool accepted = true;
    std::optional<FilterId> rejecting_filter;
    double measured_value = 0.0;
    double threshold_value = 0.0;
};

FilterVerdict f1_vote_count(const VoteGroup& group, const CascadeConfig& cfg = {});
FilterVerdict f2_adjacency_sum(const VoteGroup& group, std::size_t pattern_feature_count, const CascadeConfig& cfg = {});
FilterVerdict f3_scale_variance(const VoteGroup& group, const CascadeConfig& cfg = {});
/// Compares the variance of the rotation unit vectors, 1 - R^2, against
/// factor times their mean square (which is 1). Empty groups reject.
FilterVerdict f4_rotation_variance(const VoteGroup& group, const CascadeConfig& cfg = {});
/// Pairwise luminance-order test over all unordered vote pairs, enumerated in
/// (pattern, scene) luminance order; rejects when the fraction of disagreeing
/// bits exceeds the configured fraction.
FilterVerdict f5_binary_luminance(const VoteGroup& group, const FeatureSet& pattern, const FeatureSet& scene,
                                  const CascadeConfig& cfg = {});
/// Per-channel normalized cross-correlation of the envelope crop against the
/// pattern, both resized to ncc_patch x ncc_patch. `pattern_img` is the
/// upright object the envelope should contain.
FilterVerdict f6_global_ncc(const Envelope& envelope, const RasterImage& scene_img, const RasterImage& pattern_img,
                            const CascadeConfig& cfg = {});

/// Per-channel NCC values used by f6 (exposed for diagnostics and tests).
std::array<double, 3> channel_ncc(const RasterImage& a, const RasterImage& b, int patch);

/// Everything filters beyond the vote group itself need.
struct CascadeContext {
    const FeatureSet* pattern_features = nullptr;
    const FeatureSet* scene_features = nullptr;
    const RasterImage* pattern_image = nullptr;
    const RasterImage* scene_image = nullptr;
    Envelope envelope;
};

/// Filters of a pass, in numeric order.
std::span<const FilterId> pass_filters(int pass_id);

/// Runs a pass's enabled filters in order; the first rejection short-circuits.
/// `evaluated`, when given, receives the filters that actually ran.
FilterVerdict run_cascade(const VoteGroup& group, int pass_id, const CascadeContext& ctx, const CascadeConfig& cfg,
                          std::vector<FilterId>* evaluated = nullptr);

}  // namespace shelfscan

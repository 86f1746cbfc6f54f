#pragma once

#include "shelfscan/features.hpp"
#include "shelfscan/geometry.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace shelfscan {

// =============================================================================
// Descriptor index
// =============================================================================

struct IndexConfig {
    int trees = 4;
    /// Leaf points examined per query; 0 selects exhaustive (exact) search.
    int checks = 256;
    std::uint64_t seed = 0x5eed;
};

struct NeighborResult {
    int index = -1;
    double distance = 0.0;  ///< L2
};

/// Randomized kd-tree forest over a fixed set of descriptors, queried
/// best-bin-first across all trees under a budget of leaf checks.
class DescriptorIndex {
public:
    DescriptorIndex(const FeatureSet& features, const IndexConfig& cfg);
    /// Raw descriptor matrix, row-major, `dim` floats per row.
    DescriptorIndex(std::vector<float> rows, int dim, const IndexConfig& cfg);

    NeighborResult nearest(std::span<const float> query) const;
    NeighborResult nearest_exact(std::span<const float> query) const;

    int size() const { return count_; }
    int dim() const { return dim_; }
    bool exact() const { return cfg_.checks <= 0; }

private:
    struct Node {
        int left = -1;   // child node index, or -1
        int right = -1;
        int dim = -1;    // split dimension; -1 for a leaf
        float split = 0;
        int begin = 0;   // leaf range into the tree's permutation
        int end = 0;
    };
    struct Tree {
        std::vector<Node> nodes;
        std::vector<int> perm;
    };

    void build();
    int build_node(Tree& tree, int begin, int end, std::mt19937_64& rng);
    float distance_sq(int row, std::span<const float> q) const;

    std::vector<float> rows_;
    int dim_ = 0;
    int count_ = 0;
    IndexConfig cfg_;
    std::vector<Tree> trees_;
};

// =============================================================================
// Votes
// =============================================================================

struct MatchConfig {
    double scale_quotient_min = 0.75;  ///< exclusive
    double scale_quotient_max = 1.5;   ///< exclusive
    double hue_threshold = 45.0;       ///< degrees
    double lightness_min = 10.0;       ///< inclusive, 8-bit scale
    double lightness_max = 240.0;      ///< inclusive, 8-bit scale
    double rgb_spread_min = 10.0;      ///< exclusive
    bool color_filter = true;
    IndexConfig index;
};

void validate(const MatchConfig& cfg);

struct RawMatch {
    int scene_idx = -1;
    int pattern_idx = -1;
    double distance = 0.0;
};

/// One accepted correspondence.
///
/// `scene_x/scene_y` is where the correspondence places the pattern's anchor
/// (its center, unless overridden) in the scene: the scene feature position
/// plus the pattern feature's offset to the anchor, rotated by
/// `rotation_delta` and scaled by `scale_quotient`. `feature_x/feature_y`
/// keep the scene feature's own position.
struct Vote {
    int pattern_idx = -1;
    int scene_idx = -1;
    double descriptor_distance = 0.0;
    double adjacency = 0.0;
    double scale_quotient = 1.0;
    double rotation_delta = 0.0;  ///< degrees, [-180, 180)
    double scene_x = 0.0;
    double scene_y = 0.0;
    double feature_x = 0.0;
    double feature_y = 0.0;
};

/// Nearest pattern feature for every scene feature, unfiltered.
std::vector<RawMatch> match_descriptors(const FeatureSet& scene, const DescriptorIndex& index);

/// Midpoint between the smallest and largest match distance.
double distance_threshold(std::span<const RawMatch> matches);

/// 1 - (distance / threshold)^2.
double adjacency(double distance, double threshold);

/// Hue gate between two matched points; true keeps the pair.
bool color_filter(const FeaturePoint& pattern_pt, const FeaturePoint& scene_pt, const MatchConfig& cfg);

/// Circular hue distance in degrees, [0, 180].
double hue_distance(double h1, double h2);

struct VoteStats {
    std::size_t raw_matches = 0;
    std::size_t after_distance = 0;
    std::size_t after_color = 0;
    std::size_t after_scale = 0;
    std::size_t emitted = 0;  ///< also inside the scene bounds
    double threshold = 0.0;
};

/// Full correspondence pipeline: nearest neighbours, distance threshold,
/// color filter, scale-quotient gate, adjacency weighting. Votes whose
/// projected anchor falls outside the scene are dropped.
std::vector<Vote> make_votes(const FeatureSet& scene, const FeatureSet& pattern, const DescriptorIndex& index,
                             Point2d pattern_anchor, const MatchConfig& cfg, VoteStats* stats = nullptr);

/// Convenience overload: builds the index and anchors at the pattern center.
std::vector<Vote> make_votes(const FeatureSet& scene, const FeatureSet& pattern, const MatchConfig& cfg);

}  // namespace shelfscan

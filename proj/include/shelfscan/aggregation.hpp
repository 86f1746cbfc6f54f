#pragma once

#include "shelfscan/geometry.hpp"
#include "shelfscan/votespace.hpp"

#include <functional>
#include <span>
#include <vector>

namespace shelfscan {

// =============================================================================
// Circular statistics (degrees)
// =============================================================================

struct CircularStats {
    double mean = 0.0;              ///< degrees, [-180, 180); 0 when undefined
    double resultant_length = 0.0;  ///< |mean unit vector|, [0, 1]
};

/// Mean direction and mean resultant length of a set of angles, optionally weighted.
CircularStats circular_stats(std::span<const double> angles_deg, std::span<const double> weights = {});

// =============================================================================
// Vote groups
// =============================================================================

struct VoteGroup {
    std::vector<Vote> votes;
    Proposition proposition;
    double adjacency_sum = 0.0;
    double mean_scale_quotient = 0.0;
    double circular_mean_rotation = 0.0;
    /// Population variance of the scale quotients.
    double scale_variance = 0.0;
    /// Mean of squared scale quotients.
    double scale_mean_square = 0.0;
    /// Variance of the rotation unit vectors, 1 - R^2 with R the mean resultant length.
    double rotation_variance = 0.0;
    double rotation_resultant = 0.0;

    std::size_t size() const { return votes.size(); }
};

/// Recomputes every statistic of a group from its votes.
void update_statistics(VoteGroup& group);

VoteGroup make_group(std::vector<Vote> votes, const Proposition& prop = {});

/// Aggregation window for a pattern whose larger side is `pattern_size`:
/// (floor(pattern_size / 100) + 1) * 2 + 1.
int window_size(int pattern_size);

/// Keeps, for each pattern feature, the vote with the highest adjacency
/// (ties go to the lower scene index). Output ordered by pattern index.
std::vector<Vote> unique_filter(std::span<const Vote> votes);

/// Votes in the w x w window centered on the proposition, uniquely filtered.
VoteGroup aggregate_pass1(const VoteSpace& vs, const Proposition& prop, int w);

/// Adjacency-weighted vote centroid, pattern size scaled by the mean
/// quotient, circular mean rotation.
Envelope estimate_envelope(const VoteGroup& group, double pattern_w, double pattern_h);

/// 8-connected flood fill over pixels of a w x h grid from `seed`; a pixel
/// joins when `accept(x, y)` holds. Returns visited pixels in BFS order.
struct Pixel {
    int x = 0;
    int y = 0;
    bool operator==(const Pixel&) const = default;
};
std::vector<Pixel> flood_fill(int width, int height, Pixel seed, const std::function<bool(int, int)>& accept);

/// Flood fill from the proposition across pixels inside the shrunken
/// envelope whose w x w window holds at least one vote; collects the votes of
/// every visited pixel's window and applies the unique filter.
VoteGroup aggregate_pass2(const VoteSpace& vs, const Proposition& prop, const Envelope& envelope, int w,
                          double shrink);

}  // namespace shelfscan

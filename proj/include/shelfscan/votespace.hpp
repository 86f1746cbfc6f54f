#pragma once

#include "shelfscan/image.hpp"
#include "shelfscan/matching.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace shelfscan {

/// Votes bucketed by integer scene pixel together with the per-pixel
/// adjacency sum ("vote image").
///
/// A bucket's vote image value is always recomputed from the votes it still
/// holds, so the projection stays exactly consistent across erasures.
class VoteSpace {
public:
    VoteSpace(int width, int height);

    /// Buckets every vote at (floor(scene_x), floor(scene_y)). Throws
    /// InvalidArgument naming the first vote outside the scene.
    static VoteSpace accumulate(std::span<const Vote> votes, int width, int height);

    void add(std::span<const Vote> votes);

    int width() const { return width_; }
    int height() const { return height_; }

    double vote_image(int x, int y) const { return image_[index(x, y)]; }
    std::span<const double> vote_image() const { return image_; }

    /// Indices (into all_votes()) of the live votes bucketed at a pixel.
    const std::vector<std::uint32_t>& bucket(int x, int y) const { return buckets_[index(x, y)]; }
    const Vote& vote(std::uint32_t i) const { return votes_[i]; }
    std::span<const Vote> all_votes() const { return votes_; }

    std::size_t live_votes() const { return live_; }
    double total_mass() const;

    /// Pixels whose integer position fell inside an erased envelope. Cleared
    /// again for a pixel that later receives a new vote.
    bool is_erased(int x, int y) const { return erased_[index(x, y)] != 0; }

    struct EraseResult {
        std::size_t removed = 0;
        double removed_mass = 0.0;
    };
    /// Removes every live vote whose scene position lies inside the envelope.
    EraseResult erase_region(const Envelope& envelope);

private:
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }
    void refresh_bucket(std::size_t idx);

    int width_;
    int height_;
    std::vector<Vote> votes_;
    std::vector<std::vector<std::uint32_t>> buckets_;
    std::vector<double> image_;
    std::vector<std::uint8_t> erased_;
    std::size_t live_ = 0;
};

/// Candidate object center: a strict local maximum of the windowed vote sum.
struct Proposition {
    int x = 0;
    int y = 0;
    double window_adjacency_sum = 0.0;
};

/// Vote image values are quantized to this fixed-point step before window
/// sums are taken, which makes sums exact and ties reproducible.
inline constexpr double kVoteFixedScale = 4294967296.0;  // 2^32

/// Fixed-point window sums S(x, y) over a w x w box (border clipped).
std::vector<std::int64_t> window_sums_fixed(const VoteSpace& vs, int w_size);

/// Pixels whose windowed sum beats every other pixel of its w x w
/// neighbourhood (ties go to the smaller (y, x)) and reaches
/// quality * max S. Sorted by window sum descending, then (y, x).
std::vector<Proposition> detect_propositions(const VoteSpace& vs, int w_size, double quality = 0.01);

/// Vote image blurred then min-max normalized to 0..255.
RasterImage render_debug(const VoteSpace& vs, double sigma);

}  // namespace shelfscan

#include "shelfscan/error.hpp"
#include "shelfscan/votespace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace shelfscan {

VoteSpace::VoteSpace(int width, int height) : width_(width), height_(height) {
    if (width < 1 || height < 1) throw InvalidArgument("vote space dimensions must be positive");
    const std::size_t n = static_cast<std::size_t>(width) * height;
    buckets_.resize(n);
    image_.assign(n, 0.0);
    erased_.assign(n, 0);
}

VoteSpace VoteSpace::accumulate(std::span<const Vote> votes, int width, int height) {
    VoteSpace vs(width, height);
    vs.add(votes);
    return vs;
}

void VoteSpace::add(std::span<const Vote> votes) {
    for (std::size_t i = 0; i < votes.size(); ++i) {
        const Vote& v = votes[i];
        if (!(v.scene_x >= 0 && v.scene_y >= 0 && v.scene_x < width_ && v.scene_y < height_)) {
            throw InvalidArgument("vote " + std::to_string(i) + " lies outside the " + std::to_string(width_) + "x" +
                                  std::to_string(height_) + " vote space");
        }
    }
    votes_.reserve(votes_.size() + votes.size());
    for (const Vote& v : votes) {
        const int bx = static_cast<int>(std::floor(v.scene_x));
        const int by = static_cast<int>(std::floor(v.scene_y));
        const std::size_t idx = index(bx, by);
        buckets_[idx].push_back(static_cast<std::uint32_t>(votes_.size()));
        votes_.push_back(v);
        image_[idx] += v.adjacency;
        erased_[idx] = 0;
        ++live_;
    }
}

double VoteSpace::total_mass() const {
    double sum = 0.0;
    for (const auto& b : buckets_) {
        for (std::uint32_t i : b) sum += votes_[i].adjacency;
    }
    return sum;
}

void VoteSpace::refresh_bucket(std::size_t idx) {
    double sum = 0.0;
    for (std::uint32_t i : buckets_[idx]) sum += votes_[i].adjacency;
    image_[idx] = sum;
}

VoteSpace::EraseResult VoteSpace::erase_region(const Envelope& envelope) {
    EraseResult res;
    const BoxD bb = envelope.bounding_box();
    const int x0 = std::max(0, static_cast<int>(std::floor(bb.x0)) - 1);
    const int y0 = std::max(0, static_cast<int>(std::floor(bb.y0)) - 1);
    const int x1 = std::min(width_ - 1, static_cast<int>(std::ceil(bb.x1)) + 1);
    const int y1 = std::min(height_ - 1, static_cast<int>(std::ceil(bb.y1)) + 1);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const std::size_t idx = index(x, y);
            if (envelope.contains(x, y)) erased_[idx] = 1;
            auto& b = buckets_[idx];
            if (b.empty()) continue;
            const auto old_size = b.size();
            std::erase_if(b, [&](std::uint32_t i) {
                const Vote& v = votes_[i];
                if (!envelope.contains(v.scene_x, v.scene_y)) return false;
                res.removed_mass += v.adjacency;
                return true;
            });
            if (b.size() != old_size) {
                res.removed += old_size - b.size();
                refresh_bucket(idx);
            }
        }
    }
    live_ -= res.removed;
    return res;
}

// =============================================================================
// Propositions
// =============================================================================

std::vector<std::int64_t> window_sums_fixed(const VoteSpace& vs, int w_size) {
    const int w = vs.width();
    const int h = vs.height();
    const int r = w_size / 2;
    // integral image with a zero border row/column
    std::vector<std::int64_t> integral(static_cast<std::size_t>(w + 1) * (h + 1), 0);
    auto I = [&](int x, int y) -> std::int64_t& { return integral[static_cast<std::size_t>(y) * (w + 1) + x]; };
    for (int y = 0; y < h; ++y) {
        std::int64_t row = 0;
        for (int x = 0; x < w; ++x) {
            row += static_cast<std::int64_t>(std::llround(vs.vote_image(x, y) * kVoteFixedScale));
            I(x + 1, y + 1) = I(x + 1, y) + row;
        }
    }
    std::vector<std::int64_t> sums(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        const int ya = std::max(0, y - r), yb = std::min(h, y + r + 1);
        for (int x = 0; x < w; ++x) {
            const int xa = std::max(0, x - r), xb = std::min(w, x + r + 1);
            sums[static_cast<std::size_t>(y) * w + x] = I(xb, yb) - I(xa, yb) - I(xb, ya) + I(xa, ya);
        }
    }
    return sums;
}

std::vector<Proposition> detect_propositions(const VoteSpace& vs, int w_size, double quality) {
    if (w_size < 3 || w_size % 2 == 0) throw InvalidArgument("detect_propositions: window size must be odd and >= 3");
    const int w = vs.width();
    const int h = vs.height();
    const int r = w_size / 2;
    const auto S = window_sums_fixed(vs, w_size);
    const std::int64_t max_s = *std::max_element(S.begin(), S.end());
    std::vector<Proposition> out;
    if (max_s <= 0) return out;
    const double min_s = quality * static_cast<double>(max_s);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::int64_t s = S[static_cast<std::size_t>(y) * w + x];
            if (s <= 0 || static_cast<double>(s) < min_s || vs.is_erased(x, y)) continue;
            bool is_max = true;
            for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r) && is_max; ++yy) {
                for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
                    if (xx == x && yy == y) continue;
                    const std::int64_t q = S[static_cast<std::size_t>(yy) * w + xx];
                    if (q > s || (q == s && (yy < y || (yy == y && xx < x)))) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) out.push_back({x, y, static_cast<double>(s) / kVoteFixedScale});
        }
    }
    std::sort(out.begin(), out.end(), [](const Proposition& a, const Proposition& b) {
        if (a.window_adjacency_sum != b.window_adjacency_sum) return a.window_adjacency_sum > b.window_adjacency_sum;
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    });
    return out;
}

RasterImage render_debug(const VoteSpace& vs, double sigma) {
    FloatPlane plane(vs.width(), vs.height());
    for (std::size_t i = 0; i < plane.data.size(); ++i) plane.data[i] = static_cast<float>(vs.vote_image()[i]);
    if (sigma > 0) plane = gaussian_blur(plane, sigma);
    const auto [lo, hi] = std::minmax_element(plane.data.begin(), plane.data.end());
    RasterImage out(vs.width(), vs.height(), 1, 0);
    const float mn = *lo, mx = *hi;
    if (!(mx > mn)) return out;
    for (std::size_t i = 0; i < plane.data.size(); ++i) {
        const float v = (plane.data[i] - mn) / (mx - mn) * 255.0f;
        out.data()[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    return out;
}

}  // namespace shelfscan

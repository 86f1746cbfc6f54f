#include "shelfscan/aggregation.hpp"
#include "shelfscan/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace shelfscan {

void update_statistics(VoteGroup& g) {
    g.adjacency_sum = 0;
    g.mean_scale_quotient = 0;
    g.scale_variance = 0;
    g.scale_mean_square = 0;
    g.circular_mean_rotation = 0;
    g.rotation_variance = 0;
    g.rotation_resultant = 0;
    if (g.votes.empty()) return;

    const double n = static_cast<double>(g.votes.size());
    double sum_q = 0, sum_q2 = 0;
    std::vector<double> rotations;
    rotations.reserve(g.votes.size());
    for (const Vote& v : g.votes) {
        g.adjacency_sum += v.adjacency;
        sum_q += v.scale_quotient;
        sum_q2 += v.scale_quotient * v.scale_quotient;
        rotations.push_back(v.rotation_delta);
    }
    g.mean_scale_quotient = sum_q / n;
    g.scale_mean_square = sum_q2 / n;
    double var = 0;
    for (const Vote& v : g.votes) {
        const double d = v.scale_quotient - g.mean_scale_quotient;
        var += d * d;
    }
    g.scale_variance = var / n;

    const CircularStats cs = circular_stats(rotations);
    g.circular_mean_rotation = cs.mean;
    g.rotation_resultant = cs.resultant_length;
    g.rotation_variance = 1.0 - cs.resultant_length * cs.resultant_length;
}

VoteGroup make_group(std::vector<Vote> votes, const Proposition& prop) {
    VoteGroup g;
    g.votes = std::move(votes);
    g.proposition = prop;
    update_statistics(g);
    return g;
}

int window_size(int pattern_size) {
    if (pattern_size < 1) throw InvalidArgument("window_size: pattern size must be positive");
    return (pattern_size / 100 + 1) * 2 + 1;
}

std::vector<Vote> unique_filter(std::span<const Vote> votes) {
    std::vector<Vote> sorted(votes.begin(), votes.end());
    std::sort(sorted.begin(), sorted.end(), [](const Vote& a, const Vote& b) {
        if (a.pattern_idx != b.pattern_idx) return a.pattern_idx < b.pattern_idx;
        if (a.adjacency != b.adjacency) return a.adjacency > b.adjacency;
        return a.scene_idx < b.scene_idx;
    });
    std::vector<Vote> out;
    for (const Vote& v : sorted) {
        if (out.empty() || out.back().pattern_idx != v.pattern_idx) out.push_back(v);
    }
    return out;
}

VoteGroup aggregate_pass1(const VoteSpace& vs, const Proposition& prop, int w) {
    if (w < 1 || w % 2 == 0) throw InvalidArgument("aggregate_pass1: window size must be odd");
    const int r = w / 2;
    std::vector<Vote> collected;
    for (int y = std::max(0, prop.y - r); y <= std::min(vs.height() - 1, prop.y + r); ++y) {
        for (int x = std::max(0, prop.x - r); x <= std::min(vs.width() - 1, prop.x + r); ++x) {
            for (std::uint32_t i : vs.bucket(x, y)) collected.push_back(vs.vote(i));
        }
    }
    return make_group(unique_filter(collected), prop);
}

Envelope estimate_envelope(const VoteGroup& group, double pattern_w, double pattern_h) {
    if (group.votes.empty()) throw InvalidArgument("estimate_envelope: empty vote group");
    double sx = 0, sy = 0, sw = 0;
    for (const Vote& v : group.votes) {
        sx += v.adjacency * v.scene_x;
        sy += v.adjacency * v.scene_y;
        sw += v.adjacency;
    }
    Envelope e;
    e.center_x = sx / sw;
    e.center_y = sy / sw;
    e.width = pattern_w * group.mean_scale_quotient;
    e.height = pattern_h * group.mean_scale_quotient;
    e.rotation = group.circular_mean_rotation;
    return e;
}

std::vector<Pixel> flood_fill(int width, int height, Pixel seed, const std::function<bool(int, int)>& accept) {
    std::vector<Pixel> visited;
    if (seed.x < 0 || seed.y < 0 || seed.x >= width || seed.y >= height) return visited;
    if (!accept(seed.x, seed.y)) return visited;
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(width) * height, 0);
    std::deque<Pixel> queue{seed};
    seen[static_cast<std::size_t>(seed.y) * width + seed.x] = 1;
    while (!queue.empty()) {
        const Pixel p = queue.front();
        queue.pop_front();
        visited.push_back(p);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = p.x + dx, ny = p.y + dy;
                if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
                auto& s = seen[static_cast<std::size_t>(ny) * width + nx];
                if (s) continue;
                s = 1;
                if (accept(nx, ny)) queue.push_back({nx, ny});
            }
        }
    }
    return visited;
}

VoteGroup aggregate_pass2(const VoteSpace& vs, const Proposition& prop, const Envelope& envelope, int w,
                          double shrink) {
    if (w < 1 || w % 2 == 0) throw InvalidArgument("aggregate_pass2: window size must be odd");
    if (!(shrink > 0 && shrink <= 1)) throw InvalidArgument("aggregate_pass2: shrink must be in (0, 1]");
    const int r = w / 2;
    const Envelope region = envelope.scaled(shrink);
    const BoxD bb = region.bounding_box();

    // Local grid covering the fill region plus one window radius of margin.
    const int gx0 = std::max(0, static_cast<int>(std::floor(bb.x0)) - r);
    const int gy0 = std::max(0, static_cast<int>(std::floor(bb.y0)) - r);
    const int gx1 = std::min(vs.width() - 1, static_cast<int>(std::ceil(bb.x1)) + r);
    const int gy1 = std::min(vs.height() - 1, static_cast<int>(std::ceil(bb.y1)) + r);
    VoteGroup empty = make_group({}, prop);
    if (gx1 < gx0 || gy1 < gy0) return empty;
    const int gw = gx1 - gx0 + 1;
    const int gh = gy1 - gy0 + 1;

    std::vector<int> integral(static_cast<std::size_t>(gw + 1) * (gh + 1), 0);
    auto I = [&](int x, int y) -> int& { return integral[static_cast<std::size_t>(y) * (gw + 1) + x]; };
    for (int y = 0; y < gh; ++y) {
        int row = 0;
        for (int x = 0; x < gw; ++x) {
            row += static_cast<int>(vs.bucket(gx0 + x, gy0 + y).size());
            I(x + 1, y + 1) = I(x + 1, y) + row;
        }
    }
    auto window_count = [&](int lx, int ly) {
        const int xa = std::max(0, lx - r), xb = std::min(gw, lx + r + 1);
        const int ya = std::max(0, ly - r), yb = std::min(gh, ly + r + 1);
        return I(xb, yb) - I(xa, yb) - I(xb, ya) + I(xa, ya);
    };

    const Pixel seed{prop.x - gx0, prop.y - gy0};
    const auto visited = flood_fill(gw, gh, seed, [&](int lx, int ly) {
        return region.contains(gx0 + lx, gy0 + ly) && window_count(lx, ly) > 0;
    });
    if (visited.empty()) return empty;

    std::vector<std::uint8_t> covered(static_cast<std::size_t>(gw) * gh, 0);
    for (const Pixel& p : visited) {
        for (int y = std::max(0, p.y - r); y <= std::min(gh - 1, p.y + r); ++y) {
            for (int x = std::max(0, p.x - r); x <= std::min(gw - 1, p.x + r); ++x) {
                covered[static_cast<std::size_t>(y) * gw + x] = 1;
            }
        }
    }
    std::vector<Vote> collected;
    for (int y = 0; y < gh; ++y) {
        for (int x = 0; x < gw; ++x) {
            if (!covered[static_cast<std::size_t>(y) * gw + x]) continue;
            for (std::uint32_t i : vs.bucket(gx0 + x, gy0 + y)) collected.push_back(vs.vote(i));
        }
    }
    return make_group(unique_filter(collected), prop);
}

}  // namespace shelfscan

#include "shelfscan/aggregation.hpp"
#include "shelfscan/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace shelfscan {

double default_match_radius(const Placement& p) { return window_size(std::max(p.pattern_w, p.pattern_h)); }

SceneScore score_scene(const DetectionReport& report, const GroundTruth& truth, const RadiusFn& radius) {
    SceneScore s;
    s.placements = truth.placements.size();
    for (const std::string& p : report.products) s.false_per_process[p] = 0;
    for (const Occurrence& o : report.occurrences) s.false_per_process.try_emplace(o.pattern_id, 0);

    const auto& occs = report.occurrences;
    std::vector<std::size_t> order(occs.size());
    std::iota(order.begin(), order.end(), 0);
    // a total order on content, so the result does not depend on input order
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Occurrence& x = occs[a];
        const Occurrence& y = occs[b];
        if (x.normalized_adjacency != y.normalized_adjacency) return x.normalized_adjacency > y.normalized_adjacency;
        if (x.adjacency_sum != y.adjacency_sum) return x.adjacency_sum > y.adjacency_sum;
        if (x.envelope.center_y != y.envelope.center_y) return x.envelope.center_y < y.envelope.center_y;
        if (x.envelope.center_x != y.envelope.center_x) return x.envelope.center_x < y.envelope.center_x;
        return x.pattern_id < y.pattern_id;
    });

    std::vector<bool> taken(truth.placements.size(), false);
    for (std::size_t oi : order) {
        const Occurrence& o = occs[oi];
        const double r = radius(o.pattern_id);
        int best = -1;
        double best_d = 0;
        for (std::size_t pi = 0; pi < truth.placements.size(); ++pi) {
            const Placement& p = truth.placements[pi];
            if (taken[pi] || p.pattern_id != o.pattern_id) continue;
            const double d = std::hypot(o.envelope.center_x - p.center_x, o.envelope.center_y - p.center_y);
            if (d <= r && (best < 0 || d < best_d)) {
                best = static_cast<int>(pi);
                best_d = d;
            }
        }
        if (best >= 0) {
            taken[best] = true;
            ++s.matched;
            s.localization_errors.push_back(best_d);
        } else {
            ++s.false_per_process[o.pattern_id];
        }
    }
    return s;
}

Metrics summarize(std::span<const SceneScore> scores) {
    Metrics m;
    double loc_sum = 0;
    std::size_t loc_n = 0;
    for (const SceneScore& s : scores) {
        m.placements += s.placements;
        m.matched += s.matched;
        for (const auto& [id, fp] : s.false_per_process) {
            ++m.processes;
            if (fp > 0) {
                ++m.processes_with_false;
                m.false_positives += fp;
            }
        }
        for (double e : s.localization_errors) {
            m.max_localization_error = std::max(m.max_localization_error, e);
            loc_sum += e;
            ++loc_n;
        }
    }
    m.detection_rate = m.placements ? static_cast<double>(m.matched) / m.placements : 0.0;
    m.false_detection_chance = m.processes ? static_cast<double>(m.processes_with_false) / m.processes : 0.0;
    m.avg_false_detections =
        m.processes_with_false ? static_cast<double>(m.false_positives) / m.processes_with_false : 0.0;
    m.mean_localization_error = loc_n ? loc_sum / loc_n : 0.0;
    return m;
}

Metrics score(const DetectionReport& report, const GroundTruth& truth, const RadiusFn& radius) {
    const SceneScore s = score_scene(report, truth, radius);
    return summarize(std::span<const SceneScore>(&s, 1));
}

}  // namespace shelfscan

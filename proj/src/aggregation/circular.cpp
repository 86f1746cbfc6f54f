#include "shelfscan/aggregation.hpp"
#include "shelfscan/error.hpp"

#include <cmath>

namespace shelfscan {

CircularStats circular_stats(std::span<const double> angles_deg, std::span<const double> weights) {
    if (!weights.empty() && weights.size() != angles_deg.size()) {
        throw InvalidArgument("circular_stats: weights must match angles");
    }
    CircularStats out;
    if (angles_deg.empty()) return out;
    double sx = 0, sy = 0, wsum = 0;
    for (std::size_t i = 0; i < angles_deg.size(); ++i) {
        const double wgt = weights.empty() ? 1.0 : weights[i];
        const double rad = deg_to_rad(angles_deg[i]);
        sx += wgt * std::cos(rad);
        sy += wgt * std::sin(rad);
        wsum += wgt;
    }
    if (wsum <= 0) return out;
    sx /= wsum;
    sy /= wsum;
    out.resultant_length = std::min(1.0, std::hypot(sx, sy));
    out.mean = out.resultant_length > 0 ? wrap_signed_deg(rad_to_deg(std::atan2(sy, sx))) : 0.0;
    return out;
}

}  // namespace shelfscan

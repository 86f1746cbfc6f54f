#include "shelfscan/error.hpp"
#include "shelfscan/features.hpp"

#include <algorithm>
#include <cmath>

namespace shelfscan {

PointAppearance sample_point_appearance(const RasterImage& img, double x, double y) {
    if (img.empty() || !(x >= -0.5 && y >= -0.5 && x < img.width() - 0.5 && y < img.height() - 0.5)) {
        throw InvalidArgument("sample_point_appearance: point outside the image");
    }
    const int cx = std::clamp(static_cast<int>(std::lround(x)), 0, img.width() - 1);
    const int cy = std::clamp(static_cast<int>(std::lround(y)), 0, img.height() - 1);
    double sum[3] = {0, 0, 0};
    int count = 0;
    for (int yy = std::max(0, cy - 1); yy <= std::min(img.height() - 1, cy + 1); ++yy) {
        for (int xx = std::max(0, cx - 1); xx <= std::min(img.width() - 1, cx + 1); ++xx) {
            for (int c = 0; c < 3; ++c) sum[c] += img.at(xx, yy, img.channels() == 3 ? c : 0);
            ++count;
        }
    }
    const double r = sum[0] / count;
    const double g = sum[1] / count;
    const double b = sum[2] / count;
    PointAppearance out;
    out.color = make_color_sample(r, g, b);
    out.luminance = luminance_601(r, g, b);
    return out;
}

}  // namespace shelfscan

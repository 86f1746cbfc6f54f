#include "shelfscan/image.hpp"

#include <algorithm>
#include <cmath>

namespace shelfscan {

Hsl rgb_to_hsl(double r, double g, double b) {
    const double rn = r / 255.0;
    const double gn = g / 255.0;
    const double bn = b / 255.0;
    const double mx = std::max({rn, gn, bn});
    const double mn = std::min({rn, gn, bn});
    const double l = (mx + mn) / 2.0;
    const double d = mx - mn;

    Hsl out;
    out.l = l * 255.0;
    if (d <= 0.0) return out;

    out.s = d / (1.0 - std::abs(2.0 * l - 1.0));
    out.s = std::clamp(out.s, 0.0, 1.0);

    double h;
    if (mx == rn) {
        h = std::fmod((gn - bn) / d, 6.0);
    } else if (mx == gn) {
        h = (bn - rn) / d + 2.0;
    } else {
        h = (rn - gn) / d + 4.0;
    }
    h *= 60.0;
    if (h < 0) h += 360.0;
    if (h >= 360.0) h -= 360.0;
    out.h = h;
    return out;
}

void hsl_to_rgb(const Hsl& hsl, double& r, double& g, double& b) {
    const double l = hsl.l / 255.0;
    const double c = (1.0 - std::abs(2.0 * l - 1.0)) * hsl.s;
    const double hp = hsl.h / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r1 = 0, g1 = 0, b1 = 0;
    if (hp < 1) {
        r1 = c; g1 = x;
    } else if (hp < 2) {
        r1 = x; g1 = c;
    } else if (hp < 3) {
        g1 = c; b1 = x;
    } else if (hp < 4) {
        g1 = x; b1 = c;
    } else if (hp < 5) {
        r1 = x; b1 = c;
    } else {
        r1 = c; b1 = x;
    }
    const double m = l - c / 2.0;
    r = (r1 + m) * 255.0;
    g = (g1 + m) * 255.0;
    b = (b1 + m) * 255.0;
}

int luminance_601(double r, double g, double b) {
    const double y = 0.299 * r + 0.587 * g + 0.114 * b;
    return std::clamp(static_cast<int>(std::lround(y)), 0, 255);
}

ColorSample make_color_sample(double r, double g, double b) {
    ColorSample cs;
    cs.r = static_cast<std::uint8_t>(std::clamp(std::lround(r), 0L, 255L));
    cs.g = static_cast<std::uint8_t>(std::clamp(std::lround(g), 0L, 255L));
    cs.b = static_cast<std::uint8_t>(std::clamp(std::lround(b), 0L, 255L));
    // HSL derives from the stored 8-bit triple so that it survives serialization.
    const Hsl hsl = rgb_to_hsl(cs.r, cs.g, cs.b);
    cs.h = hsl.h;
    cs.s = hsl.s;
    cs.l = hsl.l;
    cs.luminance = luminance_601(r, g, b);
    return cs;
}

}  // namespace shelfscan

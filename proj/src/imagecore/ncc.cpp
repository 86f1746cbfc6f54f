#include "shelfscan/error.hpp"
#include "shelfscan/image.hpp"

#include <algorithm>
#include <cmath>

namespace shelfscan {

double ncc(const RasterImage& a, const RasterImage& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw InvalidArgument("ncc: images must have identical dimensions");
    }
    if (a.channels() != 1 || b.channels() != 1) {
        throw InvalidArgument("ncc: images must be single-channel");
    }
    const auto da = a.data();
    const auto db = b.data();
    const double n = static_cast<double>(da.size());
    double sa = 0, sb = 0;
    for (std::size_t i = 0; i < da.size(); ++i) {
        sa += da[i];
        sb += db[i];
    }
    const double ma = sa / n;
    const double mb = sb / n;
    double cov = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < da.size(); ++i) {
        const double xa = da[i] - ma;
        const double xb = db[i] - mb;
        cov += xa * xb;
        va += xa * xa;
        vb += xb * xb;
    }
    if (va <= 0.0 || vb <= 0.0) return 0.5;
    const double rho = std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
    return (rho + 1.0) / 2.0;
}

}  // namespace shelfscan

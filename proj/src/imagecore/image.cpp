#include "shelfscan/image.hpp"

#include "shelfscan/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace shelfscan {

namespace {

void check_shape(int width, int height, int channels) {
    if (width < 1 || height < 1) {
        throw InvalidArgument("image dimensions must be positive, got " + std::to_string(width) +
                              "x" + std::to_string(height));
    }
    if (channels != 1 && channels != 3) {
        throw InvalidArgument("image must have 1 or 3 channels, got " + std::to_string(channels));
    }
}

}  // namespace

RasterImage::RasterImage(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
    check_shape(width, height, channels);
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

RasterImage::RasterImage(int width, int height, int channels, std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    check_shape(width, height, channels);
    if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
        throw InvalidArgument("pixel buffer length does not match width*height*channels");
    }
}

RasterImage RasterImage::channel(int c) const {
    if (c < 0 || c >= channels_) throw InvalidArgument("channel index out of range");
    RasterImage out(width_, height_, 1);
    const std::size_t n = static_cast<std::size_t>(width_) * height_;
    for (std::size_t i = 0; i < n; ++i) out.data_[i] = data_[i * channels_ + c];
    return out;
}

FloatPlane::FloatPlane(int w, int h, float fill) : width(w), height(h) {
    if (w < 1 || h < 1) throw InvalidArgument("plane dimensions must be positive");
    data.assign(static_cast<std::size_t>(w) * h, fill);
}

// =============================================================================
// Geometry
// =============================================================================

double iou(const BoxD& a, const BoxD& b) {
    const double ix = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
    const double iy = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
    if (ix <= 0 || iy <= 0) return 0.0;
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0 ? inter / uni : 0.0;
}

bool Envelope::contains(double x, double y) const {
    const double rad = deg_to_rad(rotation);
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    const double dx = x - center_x;
    const double dy = y - center_y;
    // project onto the rectangle's own axes
    const double u = dx * c + dy * s;
    const double v = -dx * s + dy * c;
    constexpr double eps = 1e-9;
    return std::abs(u) <= width / 2 + eps && std::abs(v) <= height / 2 + eps;
}

Envelope Envelope::scaled(double factor) const {
    Envelope e = *this;
    e.width *= factor;
    e.height *= factor;
    return e;
}

BoxD Envelope::bounding_box() const {
    const double rad = deg_to_rad(rotation);
    const double c = std::abs(std::cos(rad));
    const double s = std::abs(std::sin(rad));
    const double ex = (width * c + height * s) / 2;
    const double ey = (width * s + height * c) / 2;
    return {center_x - ex, center_y - ey, center_x + ex, center_y + ey};
}

}  // namespace shelfscan

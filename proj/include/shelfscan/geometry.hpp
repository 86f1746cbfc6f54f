#pragma once

#include <cmath>
#include <numbers>

namespace shelfscan {

struct Point2d {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned box, half-open in pixel index space: [x0, x1) x [y0, y1).
struct BoxD {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() > 0 && height() > 0 ? width() * height() : 0.0; }
};

double iou(const BoxD& a, const BoxD& b);

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Wraps an angle in degrees into [-180, 180).
inline double wrap_signed_deg(double deg) {
    double r = std::fmod(deg + 180.0, 360.0);
    if (r < 0) r += 360.0;
    double out = r - 180.0;
    return out >= 180.0 ? out - 360.0 : out;
}

/// Wraps an angle in degrees into [0, 360).
inline double wrap_unsigned_deg(double deg) {
    double r = std::fmod(deg, 360.0);
    if (r < 0) r += 360.0;
    return r >= 360.0 ? 0.0 : r;
}

/// Estimated object rectangle in scene coordinates.
///
/// Coordinates follow the pixel-index convention used everywhere in the
/// library: the center of pixel (i, j) sits at (i, j). Rotation is measured
/// in degrees in image coordinates (x right, y down), so positive angles turn
/// the +x axis towards +y.
struct Envelope {
    double center_x = 0.0;
    double center_y = 0.0;
    double width = 1.0;
    double height = 1.0;
    double rotation = 0.0;

    /// Point-in-rotated-rectangle test, boundary inclusive.
    bool contains(double x, double y) const;

    /// Same center and rotation, both sides multiplied by `factor`.
    Envelope scaled(double factor) const;

    /// Axis-aligned bounding box of the rotated rectangle.
    BoxD bounding_box() const;
};

}  // namespace shelfscan

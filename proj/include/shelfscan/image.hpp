/**
 * @file image.hpp
 * @brief Raster primitives: 8-bit images, float planes, color conversion,
 *        resampling, blurring, cropping, normalized cross-correlation, codecs.
 */
#pragma once

#include "shelfscan/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace shelfscan {

// =============================================================================
// Image types
// =============================================================================

/// Row-major 8-bit image with 1 (luminance) or 3 (RGB) interleaved channels.
class RasterImage {
public:
    RasterImage() = default;
    RasterImage(int width, int height, int channels, std::uint8_t fill = 0);
    RasterImage(int width, int height, int channels, std::vector<std::uint8_t> data);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    bool empty() const { return data_.empty(); }

    std::uint8_t at(int x, int y, int c = 0) const {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }
    std::uint8_t& at(int x, int y, int c = 0) {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }

    std::span<const std::uint8_t> data() const { return data_; }
    std::span<std::uint8_t> data() { return data_; }

    /// Extracts one channel as a 1-channel image.
    RasterImage channel(int c) const;

    bool operator==(const RasterImage&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Single-channel float image used for accumulators and scale spaces.
struct FloatPlane {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    FloatPlane() = default;
    FloatPlane(int w, int h, float fill = 0.0f);

    float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
};

// =============================================================================
// Color
// =============================================================================

/// Color of a pixel neighborhood in RGB and HSL, plus Rec.601 luminance.
struct ColorSample {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    double h = 0.0;  ///< hue, degrees [0, 360)
    double s = 0.0;  ///< saturation, [0, 1]
    double l = 0.0;  ///< lightness on the 8-bit scale, [0, 255]
    int luminance = 0;
};

struct Hsl {
    double h = 0.0;
    double s = 0.0;
    double l = 0.0;
};

/// Standard HSL with lightness scaled to 0-255. Achromatic input gives h = 0.
Hsl rgb_to_hsl(double r, double g, double b);

/// Inverse of rgb_to_hsl; channels returned unrounded in [0, 255].
void hsl_to_rgb(const Hsl& hsl, double& r, double& g, double& b);

/// Rec.601 luma rounded to the nearest integer.
int luminance_601(double r, double g, double b);

ColorSample make_color_sample(double r, double g, double b);

// =============================================================================
// Operations
// =============================================================================

RasterImage to_grayscale(const RasterImage& img);

/// Bilinear resampling with pixel-center alignment. Aspect ratio is up to the caller.
RasterImage resize_bilinear(const RasterImage& img, int new_w, int new_h);
FloatPlane resize_bilinear(const FloatPlane& img, int new_w, int new_h);

/// Separable Gaussian, kernel radius ceil(3 sigma), clamped borders.
RasterImage gaussian_blur(const RasterImage& img, double sigma);
FloatPlane gaussian_blur(const FloatPlane& img, double sigma);

/// Gaussian blur with an explicit kernel radius (used by the scale space).
FloatPlane gaussian_blur(const FloatPlane& img, double sigma, int radius);

/// Pearson correlation of two equally sized 1-channel images mapped to [0, 1]
/// by (rho + 1) / 2. A constant input yields 0.5.
double ncc(const RasterImage& a, const RasterImage& b);

/// Integer pixel window [x0, x1) x [y0, y1) covered by an envelope's
/// bounding box, clipped to the image. Empty when there is no intersection.
struct PixelWindow {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;
    bool empty() const { return x1 <= x0 || y1 <= y0; }
};
PixelWindow envelope_window(const Envelope& envelope, int image_w, int image_h);

/// Axis-aligned crop of the envelope's bounding box intersected with the image.
RasterImage extract_subimage(const RasterImage& img, const Envelope& envelope);

/// The envelope's rectangle resampled upright (bilinear, clamped borders) at
/// round(width) x round(height). Throws when the envelope misses the image.
RasterImage extract_rectified(const RasterImage& img, const Envelope& envelope);

// =============================================================================
// Codecs
// =============================================================================

/// Reads PNG (gray, gray+alpha, RGB, RGBA, palette) or JPEG. Alpha is dropped.
RasterImage read_image(const std::filesystem::path& path);

/// Writes an 8-bit PNG with 1 or 3 channels.
void write_png(const RasterImage& img, const std::filesystem::path& path);

}  // namespace shelfscan

#pragma once

#include "shelfscan/image.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace shelfscan {

/// A scale- and rotation-aware local feature with its appearance at the point.
struct FeaturePoint {
    double x = 0.0;
    double y = 0.0;
    double scale = 1.0;        ///< characteristic radius in pixels, > 0
    double orientation = 0.0;  ///< degrees, [0, 360)
    std::vector<float> descriptor;
    ColorSample color;
    int luminance = 0;

    bool operator==(const FeaturePoint& o) const;
};

struct FeatureSet {
    std::string source_id;
    int image_w = 0;
    int image_h = 0;
    int descriptor_len = 128;
    std::vector<FeaturePoint> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool operator==(const FeatureSet&) const = default;
};

struct ExtractorConfig {
    int octaves = 4;
    int scales_per_octave = 3;
    double contrast_threshold = 0.03;
    double edge_threshold = 10.0;
    double base_sigma = 1.6;
    double assumed_blur = 0.5;
    /// Prepend an octave built from the image upsampled 2x.
    bool upsample = true;
};

/// Difference-of-Gaussians keypoints with dominant-orientation assignment and
/// 4x4x8 gradient-histogram descriptors (L2-normalized), each annotated with
/// the color and luminance around it.
FeatureSet extract_features(const RasterImage& img, const ExtractorConfig& cfg = {},
                            std::string source_id = {});

struct PointAppearance {
    ColorSample color;
    int luminance = 0;
};

/// Mean RGB over the 3x3 neighbourhood of the nearest pixel, clipped at borders.
PointAppearance sample_point_appearance(const RasterImage& img, double x, double y);

/// Structural validation shared by the reader and tests: bounds, descriptor
/// lengths, value ranges. Throws ParseError naming the first bad point.
void validate_feature_set(const FeatureSet& fs);

void write_features(const FeatureSet& fs, const std::filesystem::path& path);
FeatureSet read_features(const std::filesystem::path& path);

std::string features_to_json(const FeatureSet& fs);
FeatureSet features_from_json(const std::string& text);

}  // namespace shelfscan

/**
 * @file evalkit.hpp
 * @brief Synthetic shelf scenes, ground truth, and detection scoring.
 */
#pragma once

#include "shelfscan/image.hpp"
#include "shelfscan/pipeline.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace shelfscan {

// =============================================================================
// Ground truth
// =============================================================================

struct Placement {
    std::string pattern_id;
    double center_x = 0.0;  ///< scene position of the pattern center
    double center_y = 0.0;
    double scale = 1.0;
    double rotation = 0.0;  ///< degrees
    int pattern_w = 0;
    int pattern_h = 0;
};

struct GroundTruth {
    std::string scene_id;
    int width = 0;
    int height = 0;
    std::vector<Placement> placements;
};

std::string truth_to_json(const GroundTruth& truth, int indent = 2);
GroundTruth truth_from_json(const std::string& text);

// =============================================================================
// Scene synthesis
// =============================================================================

struct NamedImage {
    std::string id;
    RasterImage image;
};

/// Procedural packaging art: colored panels, shapes, glyph rows and a logo.
/// A nonzero `variant` draws the same design as an edition whose background
/// and band panels have their lightness flipped, hue kept.
RasterImage generate_product_art(std::uint64_t seed, int width = 240, int height = 180, int variant = 0);

struct SceneSpec {
    std::string scene_id = "scene";
    int width = 1024;
    int height = 768;
    std::uint64_t seed = 1;
    int placements = 0;
    double scale_min = 1.0;
    double scale_max = 1.0;
    double rotation_min = 0.0;
    double rotation_max = 0.0;
    bool same_pattern = false;  ///< every placement uses one randomly drawn pattern
    int distractors = 0;        ///< untracked products from the distractor pool
    int decoys = 0;             ///< untracked look-alikes from the decoy pool
    double texture = 1.0;       ///< background noise amplitude, 0 gives a flat wall
    bool shelf_lines = true;
    double noise_sigma = 0.0;
    double gradient_amplitude = 0.0;  ///< brightness ramps by +-amplitude across the scene
    std::array<double, 3> color_cast = {1.0, 1.0, 1.0};
    double product_blur = 0.0;      ///< Gaussian sigma applied to products before placement
    double product_contrast = 1.0;  ///< products are pulled toward their mean by this factor
};

void validate(const SceneSpec& spec);

/// Deterministic given the scene description. Tracked placements are drawn first and
/// must fit without overlap (InvalidArgument otherwise); distractors and
/// decoys that find no room are skipped.
std::pair<RasterImage, GroundTruth> generate_scene(const SceneSpec& spec, std::span<const NamedImage> patterns,
                                                   std::span<const NamedImage> distractors = {},
                                                   std::span<const NamedImage> decoys = {});

// =============================================================================
// Scoring
// =============================================================================

struct SceneScore {
    std::size_t placements = 0;
    std::size_t matched = 0;
    /// False positives per detection process (one per tested product).
    std::map<std::string, std::size_t> false_per_process;
    /// Center distance of every matched occurrence.
    std::vector<double> localization_errors;
};

struct Metrics {
    std::size_t placements = 0;
    std::size_t matched = 0;
    std::size_t processes = 0;
    std::size_t processes_with_false = 0;
    std::size_t false_positives = 0;
    double detection_rate = 0.0;          ///< 0 when there are no placements
    double false_detection_chance = 0.0;
    double avg_false_detections = 0.0;    ///< 0 when no process had a false positive
    double max_localization_error = 0.0;
    double mean_localization_error = 0.0;
};

/// Match radius as a function of the pattern id.
using RadiusFn = std::function<double(const std::string&)>;

/// Greedy one-to-one matching by descending normalized adjacency: each
/// occurrence takes the nearest free placement of the same pattern within the
/// radius; the rest are false positives of their product's process.
SceneScore score_scene(const DetectionReport& report, const GroundTruth& truth, const RadiusFn& radius);

Metrics summarize(std::span<const SceneScore> scores);

Metrics score(const DetectionReport& report, const GroundTruth& truth, const RadiusFn& radius);

/// Default radius: the aggregation window of a pattern of that size.
double default_match_radius(const Placement& p);

// =============================================================================
// Benchmark suites
// =============================================================================

/// Published figures on real shelf photos, kept for side-by-side reporting.
namespace reference {
inline constexpr double kDetectionRate12MPx = 0.890;
inline constexpr double kFalseChance12MPx = 0.0072;
inline constexpr double kDetectionRate3MPx = 0.844;
inline constexpr double kFalseChance3MPx = 0.0163;
inline constexpr double kAvgFalse12MPx = 3.07;
inline constexpr double kAvgFalse3MPx = 3.28;
}  // namespace reference

enum class SuiteKind {
    Positive,  ///< every product of the library is run on every scene
    Negative,  ///< one product per scene, absent from it
};

struct SuiteSpec {
    std::string name = "suite";
    SuiteKind kind = SuiteKind::Positive;
    std::uint64_t seed = 1;
    int scenes = 10;
    int width = 1024;
    int height = 768;
    int products = 6;     ///< library size
    int pattern_w = 240;
    int pattern_h = 180;
    int placements_min = 1;
    int placements_max = 4;
    double scale_min = 0.6;
    double scale_max = 1.6;
    double rotation_min = -25.0;
    double rotation_max = 25.0;
    bool same_pattern = false;
    int distractors = 2;
    double decoy_rate = 0.0;  ///< negative suites: chance a scene holds an edition of the tested product
    double texture = 1.0;
    double noise_sigma = 8.0;
    double gradient_min = 0.0;
    double gradient_max = 0.0;
    double color_cast = 0.0;  ///< max per-channel deviation of the illuminant from white
    double product_blur = 0.0;
    double product_contrast = 1.0;
};

void validate(const SuiteSpec& spec);
SuiteSpec suite_from_json(const std::string& text);
std::string suite_to_json(const SuiteSpec& spec, int indent = 2);

/// Product library and distractor pool a suite draws from.
std::vector<NamedImage> suite_library(const SuiteSpec& spec);
std::vector<NamedImage> suite_distractors(const SuiteSpec& spec);

/// Scene i of a suite, with the products it is tested against.
struct SuiteScene {
    SceneSpec spec;
    RasterImage image;
    GroundTruth truth;
    std::vector<std::string> tested;
};
SuiteScene make_suite_scene(const SuiteSpec& spec, int index, std::span<const NamedImage> library,
                            std::span<const NamedImage> distractors);

struct SceneRow {
    std::string scene_id;
    std::size_t placements = 0;
    std::size_t tested = 0;
    std::size_t occurrences = 0;
    std::size_t matched = 0;
    std::size_t false_positives = 0;
    std::size_t phase1_matched = 0;
    std::size_t phase1_false_positives = 0;
    double max_localization_error = 0.0;
};

struct BenchResult {
    SuiteSpec spec;
    std::vector<SceneRow> rows;
    Metrics metrics;         ///< phase 1 and phase 2 merged
    Metrics phase1_metrics;  ///< phase 1 only
    double seconds = 0.0;
};

using ProgressFn = std::function<void(const SceneRow&)>;

BenchResult run_suite(const SuiteSpec& spec, const RunConfig& cfg, const ProgressFn& progress = {});

std::string rows_to_csv(std::span<const SceneRow> rows);
std::string metrics_to_json(const Metrics& m);
std::string bench_to_json(const BenchResult& result, int indent = 2);

}  // namespace shelfscan

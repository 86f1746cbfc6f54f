/**
 * @file pipeline.hpp
 * @brief Product detection orchestration: size cascade, per-pattern
 *        proposition loop, two-phase redetection and consolidation.
 */
#pragma once

#include "shelfscan/aggregation.hpp"
#include "shelfscan/cascade.hpp"
#include "shelfscan/features.hpp"
#include "shelfscan/matching.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace shelfscan {

struct PipelineConfig {
    int min_dim = 100;          ///< smallest larger-side of a size-cascade entry
    double shrink = 0.8;        ///< flood-fill envelope shrink factor
    double iou_threshold = 0.5; ///< overlap test for consolidation
    int max_propositions = 64;  ///< per pattern entry
    double quality = 0.01;      ///< relative proposition strength
    bool two_phase = true;
    std::string debug_dir;      ///< when set, vote images are written here
    double debug_sigma = 2.0;
};

/// Every tunable of a detection run.
struct RunConfig {
    ExtractorConfig extractor;
    MatchConfig matching;
    CascadeConfig cascade;
    PipelineConfig pipeline;
};

void validate(const RunConfig& cfg);

// =============================================================================
// Patterns and scenes
// =============================================================================

struct PatternEntry {
    std::string pattern_id;  ///< unique per entry, e.g. "soap", "soap~s1", "soap~scene"
    std::string product_id;  ///< base pattern the entry derives from
    RasterImage image;
    FeatureSet features;
    std::optional<std::string> parent_id;
    int scale_step = 0;
    int phase = 1;
    /// Pattern point mapped onto the object center by every vote.
    Point2d anchor;
    /// Object rectangle the pattern depicts, in pattern pixels.
    double object_w = 0;
    double object_h = 0;
    double object_rotation = 0;
    /// Feature count of the original, unresized base pattern.
    std::size_t original_feature_count = 0;
};

/// Wraps a base pattern image: extracts features, anchors at the image center.
PatternEntry make_pattern_entry(std::string id, RasterImage image, const ExtractorConfig& cfg);

/// Halves both dimensions per step while the larger one stays >= min_dim.
/// Entry 0 is the base itself; features are re-extracted per entry.
std::vector<PatternEntry> build_size_cascade(const PatternEntry& base, int min_dim, const ExtractorConfig& cfg);

/// Sizes the cascade would produce, without extracting features.
std::vector<std::pair<int, int>> size_cascade_dims(int width, int height, int min_dim);

struct ProductPatterns {
    std::string product_id;
    std::vector<PatternEntry> cascade;  ///< cascade[0] is the base pattern

    const PatternEntry& base() const { return cascade.front(); }
};

ProductPatterns prepare_product(std::string id, RasterImage image, const RunConfig& cfg);

struct SceneContext {
    std::string scene_id;
    RasterImage image;
    FeatureSet features;
};

SceneContext make_scene_context(std::string id, RasterImage image, const ExtractorConfig& cfg);

// =============================================================================
// Detection
// =============================================================================

struct Occurrence {
    std::string pattern_id;  ///< product id
    std::string entry_id;    ///< the cascade / phase-2 entry that produced it
    Envelope envelope;
    double adjacency_sum = 0.0;
    double normalized_adjacency = 0.0;
    int phase = 1;
    int vote_count = 0;

    BoxD box() const { return envelope.bounding_box(); }
};

struct PatternDiagnostics {
    std::string entry_id;
    std::string product_id;
    int phase = 1;
    int scale_step = 0;
    int pattern_w = 0;
    int pattern_h = 0;
    std::size_t pattern_features = 0;
    std::size_t votes = 0;
    std::size_t propositions = 0;
    std::size_t propositions_tried = 0;
    std::size_t accepted = 0;
    std::array<std::size_t, 6> rejections_pass1{};
    std::array<std::size_t, 6> rejections_pass2{};
};

/// Sequential proposition loop for one pattern entry: vote, accumulate,
/// propose, then per proposition pass-1 aggregation and cascade, envelope
/// estimate, pass-2 aggregation and cascade; accepted groups become
/// occurrences and are erased from the vote space.
std::vector<Occurrence> detect_single_pattern(const SceneContext& scene, const PatternEntry& entry,
                                              const RunConfig& cfg, PatternDiagnostics* diag = nullptr);

enum class ConsolidationMode {
    SamePattern,   ///< merge overlaps of one product, summing adjacency
    CrossPattern,  ///< keep the best normalized adjacency among overlaps
};

/// Union-find over the overlap graph (bounding-box IoU >= threshold).
std::vector<Occurrence> consolidate(std::span<const Occurrence> occurrences, ConsolidationMode mode,
                                    double iou_threshold);

struct TwoPhaseResult {
    std::vector<Occurrence> phase1;  ///< consolidated
    std::vector<Occurrence> phase2;  ///< raw phase-2 detections
    std::vector<Occurrence> merged;
    std::optional<PatternEntry> scene_pattern;
    std::vector<PatternDiagnostics> diagnostics;
};

/// Phase 1 over the size cascade, then (if anything was found) a second pass
/// with a pattern cut from the scene at the strongest phase-1 occurrence.
TwoPhaseResult run_two_phase(const SceneContext& scene, const ProductPatterns& product, const RunConfig& cfg);

/// Builds the phase-2 pattern from a phase-1 occurrence.
PatternEntry extract_scene_pattern(const SceneContext& scene, const Occurrence& best, const ProductPatterns& product,
                                   const ExtractorConfig& cfg);

struct DetectionReport {
    std::string scene_id;
    std::vector<Occurrence> occurrences;
    std::vector<PatternDiagnostics> diagnostics;
    std::vector<std::string> products;  ///< every product tested
};

DetectionReport run_multi_product(const SceneContext& scene, std::span<const ProductPatterns> products,
                                  const RunConfig& cfg);

std::string report_to_json(const DetectionReport& report, int indent = 2);
DetectionReport report_from_json(const std::string& text);

}  // namespace shelfscan

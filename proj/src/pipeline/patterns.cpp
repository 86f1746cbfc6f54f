#include "shelfscan/error.hpp"
#include "shelfscan/pipeline.hpp"

#include <algorithm>

namespace shelfscan {

void validate(const RunConfig& cfg) {
    if (cfg.extractor.octaves < 1 || cfg.extractor.scales_per_octave < 1) {
        throw InvalidArgument("extractor: octaves and scales_per_octave must be positive");
    }
    if (!(cfg.extractor.contrast_threshold > 0)) throw InvalidArgument("extractor: contrast_threshold must be positive");
    validate(cfg.matching);
    validate(cfg.cascade);
    const auto& p = cfg.pipeline;
    if (p.min_dim < 1) throw InvalidArgument("pipeline: min_dim must be positive");
    if (!(p.shrink > 0 && p.shrink <= 1)) throw InvalidArgument("pipeline: shrink must be in (0, 1]");
    if (!(p.iou_threshold > 0 && p.iou_threshold <= 1)) throw InvalidArgument("pipeline: iou_threshold must be in (0, 1]");
    if (p.max_propositions < 1) throw InvalidArgument("pipeline: max_propositions must be positive");
    if (!(p.quality >= 0 && p.quality <= 1)) throw InvalidArgument("pipeline: quality must be in [0, 1]");
    if (!(p.debug_sigma > 0)) throw InvalidArgument("pipeline: debug_sigma must be positive");
}

PatternEntry make_pattern_entry(std::string id, RasterImage image, const ExtractorConfig& cfg) {
    if (image.empty()) throw InvalidArgument("pattern '" + id + "' has an empty image");
    PatternEntry e;
    e.pattern_id = id;
    e.product_id = id;
    e.features = extract_features(image, cfg, id);
    e.anchor = {(image.width() - 1) / 2.0, (image.height() - 1) / 2.0};
    e.object_w = image.width();
    e.object_h = image.height();
    e.original_feature_count = e.features.size();
    e.image = std::move(image);
    return e;
}

std::vector<std::pair<int, int>> size_cascade_dims(int width, int height, int min_dim) {
    std::vector<std::pair<int, int>> dims{{width, height}};
    while (true) {
        const int w = dims.back().first / 2;
        const int h = dims.back().second / 2;
        if (w < 1 || h < 1 || std::max(w, h) < min_dim) break;
        dims.emplace_back(w, h);
    }
    return dims;
}

std::vector<PatternEntry> build_size_cascade(const PatternEntry& base, int min_dim, const ExtractorConfig& cfg) {
    if (base.image.empty()) throw InvalidArgument("build_size_cascade: empty pattern");
    std::vector<PatternEntry> out{base};
    const auto dims = size_cascade_dims(base.image.width(), base.image.height(), min_dim);
    for (std::size_t step = 1; step < dims.size(); ++step) {
        const auto [w, h] = dims[step];
        PatternEntry e;
        e.pattern_id = base.pattern_id + "~s" + std::to_string(step);
        e.product_id = base.product_id;
        e.parent_id = base.pattern_id;
        e.scale_step = static_cast<int>(step);
        e.image = resize_bilinear(base.image, w, h);
        e.features = extract_features(e.image, cfg, e.pattern_id);
        e.anchor = {(w - 1) / 2.0, (h - 1) / 2.0};
        e.object_w = w;
        e.object_h = h;
        e.original_feature_count = base.original_feature_count;
        out.push_back(std::move(e));
    }
    return out;
}

ProductPatterns prepare_product(std::string id, RasterImage image, const RunConfig& cfg) {
    ProductPatterns p;
    p.product_id = id;
    const PatternEntry base = make_pattern_entry(std::move(id), std::move(image), cfg.extractor);
    p.cascade = build_size_cascade(base, cfg.pipeline.min_dim, cfg.extractor);
    return p;
}

SceneContext make_scene_context(std::string id, RasterImage image, const ExtractorConfig& cfg) {
    SceneContext s;
    s.scene_id = std::move(id);
    s.features = extract_features(image, cfg, s.scene_id);
    s.image = std::move(image);
    return s;
}

PatternEntry extract_scene_pattern(const SceneContext& scene, const Occurrence& best, const ProductPatterns& product,
                                   const ExtractorConfig& cfg) {
    const PixelWindow win = envelope_window(best.envelope, scene.image.width(), scene.image.height());
    PatternEntry e;
    e.pattern_id = product.product_id + "~scene";
    e.product_id = product.product_id;
    e.parent_id = best.entry_id;
    e.phase = 2;
    e.image = extract_subimage(scene.image, best.envelope);
    e.features = extract_features(e.image, cfg, e.pattern_id);
    // the crop is axis-aligned; the object inside keeps its own center, size and rotation
    e.anchor = {best.envelope.center_x - win.x0, best.envelope.center_y - win.y0};
    e.object_w = best.envelope.width;
    e.object_h = best.envelope.height;
    e.object_rotation = best.envelope.rotation;
    e.original_feature_count = product.base().original_feature_count;
    return e;
}

}  // namespace shelfscan

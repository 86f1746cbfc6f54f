#include "shelfscan/error.hpp"
#include "shelfscan/pipeline.hpp"
#include "shelfscan/votespace.hpp"

#include <algorithm>
#include <filesystem>

namespace shelfscan {

namespace {

void write_debug_image(const VoteSpace& vs, const PatternEntry& entry, const PipelineConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.debug_dir);
    const std::string name =
        entry.product_id + "_" + std::to_string(entry.phase) + "_" + std::to_string(entry.scale_step) + ".png";
    write_png(render_debug(vs, cfg.debug_sigma), fs::path(cfg.debug_dir) / name);
}

Envelope envelope_for(const VoteGroup& group, const PatternEntry& entry) {
    Envelope e = estimate_envelope(group, entry.object_w, entry.object_h);
    e.rotation = wrap_signed_deg(e.rotation + entry.object_rotation);
    return e;
}

}  // namespace

std::vector<Occurrence> detect_single_pattern(const SceneContext& scene, const PatternEntry& entry,
                                              const RunConfig& cfg, PatternDiagnostics* diag) {
    PatternDiagnostics local;
    PatternDiagnostics& d = diag ? *diag : local;
    d = {};
    d.entry_id = entry.pattern_id;
    d.product_id = entry.product_id;
    d.phase = entry.phase;
    d.scale_step = entry.scale_step;
    d.pattern_w = entry.image.width();
    d.pattern_h = entry.image.height();
    d.pattern_features = entry.features.size();

    std::vector<Occurrence> out;
    const int sw = scene.image.width();
    const int sh = scene.image.height();
    std::vector<Vote> votes;
    if (!entry.features.empty() && !scene.features.empty()) {
        const DescriptorIndex index(entry.features, cfg.matching.index);
        votes = make_votes(scene.features, entry.features, index, entry.anchor, cfg.matching);
    }
    d.votes = votes.size();
    VoteSpace vs = VoteSpace::accumulate(votes, sw, sh);
    if (!cfg.pipeline.debug_dir.empty()) write_debug_image(vs, entry, cfg.pipeline);
    if (votes.empty()) return out;

    const int w = window_size(std::max(entry.image.width(), entry.image.height()));
    const auto props = detect_propositions(vs, w, cfg.pipeline.quality);
    d.propositions = props.size();

    // f6 compares against the upright object; phase-2 crops hold it rotated
    RasterImage upright;
    const RasterImage* reference = &entry.image;
    const bool whole = entry.object_rotation == 0.0 && entry.object_w == entry.image.width() &&
                       entry.object_h == entry.image.height();
    if (cfg.cascade.ncc_crop == NccCrop::Rectified && !whole) {
        upright = extract_rectified(entry.image, {entry.anchor.x, entry.anchor.y, entry.object_w, entry.object_h,
                                                  entry.object_rotation});
        reference = &upright;
    }

    CascadeContext ctx;
    ctx.pattern_features = &entry.features;
    ctx.scene_features = &scene.features;
    ctx.pattern_image = reference;
    ctx.scene_image = &scene.image;

    for (const Proposition& prop : props) {
        if (d.propositions_tried >= static_cast<std::size_t>(cfg.pipeline.max_propositions)) break;
        if (vs.is_erased(prop.x, prop.y)) continue;
        ++d.propositions_tried;

        const VoteGroup g1 = aggregate_pass1(vs, prop, w);
        ctx.envelope = {};
        const FilterVerdict v1 = run_cascade(g1, 1, ctx, cfg.cascade);
        if (!v1.accepted) {
            ++d.rejections_pass1[static_cast<int>(*v1.rejecting_filter) - 1];
            continue;
        }
        const Envelope env1 = g1.votes.empty() ? Envelope{prop.x * 1.0, prop.y * 1.0, entry.object_w,
                                                           entry.object_h, entry.object_rotation}
                                               : envelope_for(g1, entry);
        const VoteGroup g2 = aggregate_pass2(vs, prop, env1, w, cfg.pipeline.shrink);
        ctx.envelope = g2.votes.empty() ? env1 : envelope_for(g2, entry);
        const FilterVerdict v2 = run_cascade(g2, 2, ctx, cfg.cascade);
        if (!v2.accepted) {
            ++d.rejections_pass2[static_cast<int>(*v2.rejecting_filter) - 1];
            continue;
        }

        Occurrence occ;
        occ.pattern_id = entry.product_id;
        occ.entry_id = entry.pattern_id;
        occ.envelope = ctx.envelope;
        occ.adjacency_sum = g2.adjacency_sum;
        occ.normalized_adjacency =
            entry.original_feature_count ? g2.adjacency_sum / static_cast<double>(entry.original_feature_count) : 0.0;
        occ.phase = entry.phase;
        occ.vote_count = static_cast<int>(g2.size());
        out.push_back(occ);
        ++d.accepted;
        vs.erase_region(occ.envelope);
    }
    return out;
}

namespace {

const Occurrence& strongest(std::span<const Occurrence> occs) {
    const Occurrence* best = &occs.front();
    for (const Occurrence& o : occs.subspan(1)) {
        const bool better =
            o.adjacency_sum > best->adjacency_sum ||
            (o.adjacency_sum == best->adjacency_sum &&
             (o.envelope.center_x < best->envelope.center_x ||
              (o.envelope.center_x == best->envelope.center_x && o.envelope.center_y < best->envelope.center_y)));
        if (better) best = &o;
    }
    return *best;
}

}  // namespace

TwoPhaseResult run_two_phase(const SceneContext& scene, const ProductPatterns& product, const RunConfig& cfg) {
    TwoPhaseResult res;
    std::vector<Occurrence> raw;
    for (const PatternEntry& entry : product.cascade) {
        PatternDiagnostics diag;
        const auto found = detect_single_pattern(scene, entry, cfg, &diag);
        raw.insert(raw.end(), found.begin(), found.end());
        res.diagnostics.push_back(std::move(diag));
    }
    res.phase1 = consolidate(raw, ConsolidationMode::SamePattern, cfg.pipeline.iou_threshold);
    if (res.phase1.empty() || !cfg.pipeline.two_phase) {
        res.merged = res.phase1;
        return res;
    }

    const Occurrence& best = strongest(res.phase1);
    res.scene_pattern = extract_scene_pattern(scene, best, product, cfg.extractor);
    PatternDiagnostics diag;
    res.phase2 = detect_single_pattern(scene, *res.scene_pattern, cfg, &diag);
    res.diagnostics.push_back(std::move(diag));

    std::vector<Occurrence> all = res.phase1;
    all.insert(all.end(), res.phase2.begin(), res.phase2.end());
    res.merged = consolidate(all, ConsolidationMode::SamePattern, cfg.pipeline.iou_threshold);
    return res;
}

DetectionReport run_multi_product(const SceneContext& scene, std::span<const ProductPatterns> products,
                                  const RunConfig& cfg) {
    if (products.empty()) throw InvalidArgument("run_multi_product: at least one pattern is required");
    validate(cfg);
    DetectionReport report;
    report.scene_id = scene.scene_id;
    std::vector<Occurrence> all;
    for (const ProductPatterns& p : products) {
        TwoPhaseResult r = run_two_phase(scene, p, cfg);
        all.insert(all.end(), r.merged.begin(), r.merged.end());
        for (auto& d : r.diagnostics) report.diagnostics.push_back(std::move(d));
        report.products.push_back(p.product_id);
    }
    report.occurrences = consolidate(all, ConsolidationMode::CrossPattern, cfg.pipeline.iou_threshold);
    return report;
}

}  // namespace shelfscan

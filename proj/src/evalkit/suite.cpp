#include "shelfscan/error.hpp"
#include "shelfscan/evalkit.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <set>
#include <sstream>

namespace shelfscan {

using nlohmann::json;

namespace {

const char* kind_name(SuiteKind k) { return k == SuiteKind::Positive ? "positive" : "negative"; }

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr int kDistractorPool = 8;

}  // namespace

void validate(const SuiteSpec& s) {
    const auto fail = [](const std::string& m) { throw ConfigError("suite: " + m); };
    if (s.scenes < 1) fail("scenes must be at least 1");
    if (s.products < 1) fail("products must be at least 1");
    if (s.width < 64 || s.height < 64) fail("scene size must be at least 64x64");
    if (s.pattern_w < 16 || s.pattern_h < 16) fail("pattern size must be at least 16x16");
    if (s.placements_min < 0 || s.placements_max < s.placements_min) fail("invalid placement count range");
    if (!(s.scale_min >= 0.5 && s.scale_max <= 2.0 && s.scale_min <= s.scale_max)) fail("scale range must lie within [0.5, 2]");
    if (!(s.rotation_min >= -30 && s.rotation_max <= 30 && s.rotation_min <= s.rotation_max)) {
        fail("rotation range must lie within [-30, 30]");
    }
    if (s.distractors < 0) fail("distractors must be non-negative");
    if (!(s.decoy_rate >= 0 && s.decoy_rate <= 1)) fail("decoy_rate must be in [0, 1]");
    if (!(s.noise_sigma >= 0)) fail("noise_sigma must be non-negative");
    if (!(s.gradient_min >= 0 && s.gradient_max < 1 && s.gradient_min <= s.gradient_max)) {
        fail("gradient range must lie within [0, 1)");
    }
    if (!(s.color_cast >= 0 && s.color_cast < 1)) fail("color_cast must be in [0, 1)");
    if (!(s.product_blur >= 0)) fail("product_blur must be non-negative");
    if (!(s.product_contrast > 0 && s.product_contrast <= 1)) fail("product_contrast must be in (0, 1]");
    if (!(s.texture >= 0)) fail("texture must be non-negative");
}

std::string suite_to_json(const SuiteSpec& s, int indent) {
    const json j = {{"name", s.name},
                    {"kind", kind_name(s.kind)},
                    {"seed", s.seed},
                    {"scenes", s.scenes},
                    {"width", s.width},
                    {"height", s.height},
                    {"products", s.products},
                    {"pattern_w", s.pattern_w},
                    {"pattern_h", s.pattern_h},
                    {"placements_min", s.placements_min},
                    {"placements_max", s.placements_max},
                    {"scale_min", s.scale_min},
                    {"scale_max", s.scale_max},
                    {"rotation_min", s.rotation_min},
                    {"rotation_max", s.rotation_max},
                    {"same_pattern", s.same_pattern},
                    {"distractors", s.distractors},
                    {"decoy_rate", s.decoy_rate},
                    {"texture", s.texture},
                    {"noise_sigma", s.noise_sigma},
                    {"gradient_min", s.gradient_min},
                    {"gradient_max", s.gradient_max},
                    {"color_cast", s.color_cast},
                    {"product_blur", s.product_blur},
                    {"product_contrast", s.product_contrast}};
    return j.dump(indent);
}

SuiteSpec suite_from_json(const std::string& text) {
    SuiteSpec s;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("suite: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("suite: top level must be an object");
    const json defaults = json::parse(suite_to_json(s, -1));
    for (const auto& [key, value] : j.items()) {
        if (!key.empty() && key[0] == '#') continue;
        if (!defaults.contains(key)) throw ConfigError("suite: unknown key '" + key + "'");
        const json& d = defaults.at(key);
        const bool ok = d.is_string()    ? value.is_string()
                        : d.is_boolean() ? value.is_boolean()
                        : d.is_number_float() ? value.is_number()
                                              : (value.is_number_integer() || value.is_number_unsigned());
        if (!ok) throw ConfigError("suite: '" + key + "' has the wrong type");
    }
    const auto get = [&](const char* key, auto& out) {
        if (j.contains(key)) out = j.at(key).get<std::decay_t<decltype(out)>>();
    };
    get("name", s.name);
    std::string kind = kind_name(s.kind);
    get("kind", kind);
    if (kind == "positive") {
        s.kind = SuiteKind::Positive;
    } else if (kind == "negative") {
        s.kind = SuiteKind::Negative;
    } else {
        throw ConfigError("suite: kind must be 'positive' or 'negative'");
    }
    get("seed", s.seed);
    get("scenes", s.scenes);
    get("width", s.width);
    get("height", s.height);
    get("products", s.products);
    get("pattern_w", s.pattern_w);
    get("pattern_h", s.pattern_h);
    get("placements_min", s.placements_min);
    get("placements_max", s.placements_max);
    get("scale_min", s.scale_min);
    get("scale_max", s.scale_max);
    get("rotation_min", s.rotation_min);
    get("rotation_max", s.rotation_max);
    get("same_pattern", s.same_pattern);
    get("distractors", s.distractors);
    get("decoy_rate", s.decoy_rate);
    get("texture", s.texture);
    get("noise_sigma", s.noise_sigma);
    get("gradient_min", s.gradient_min);
    get("gradient_max", s.gradient_max);
    get("color_cast", s.color_cast);
    get("product_blur", s.product_blur);
    get("product_contrast", s.product_contrast);
    validate(s);
    return s;
}

std::vector<NamedImage> suite_library(const SuiteSpec& spec) {
    std::vector<NamedImage> out;
    for (int k = 0; k < spec.products; ++k) {
        char id[32];
        std::snprintf(id, sizeof id, "product_%02d", k);
        out.push_back({id, generate_product_art(mix(spec.seed, 1000 + k), spec.pattern_w, spec.pattern_h)});
    }
    return out;
}

std::vector<NamedImage> suite_distractors(const SuiteSpec& spec) {
    std::vector<NamedImage> out;
    for (int k = 0; k < kDistractorPool; ++k) {
        char id[32];
        std::snprintf(id, sizeof id, "distractor_%02d", k);
        // distractors vary in shape so they do not mirror the library's aspect
        const int w = spec.pattern_w * (70 + 10 * (k % 4)) / 100;
        const int h = spec.pattern_h * (130 - 10 * (k % 3)) / 100;
        out.push_back({id, generate_product_art(mix(spec.seed, 5000 + k), w, h)});
    }
    return out;
}

SuiteScene make_suite_scene(const SuiteSpec& spec, int index, std::span<const NamedImage> library,
                            std::span<const NamedImage> distractors) {
    SuiteScene sc;
    SceneSpec& ss = sc.spec;
    char id[64];
    std::snprintf(id, sizeof id, "%s_%03d", spec.name.c_str(), index);
    ss.scene_id = id;
    ss.width = spec.width;
    ss.height = spec.height;
    ss.seed = mix(spec.seed, index);
    std::mt19937_64 rng(mix(ss.seed, 77));
    std::uniform_real_distribution<> u(0.0, 1.0);
    ss.placements = spec.placements_min +
                    std::min(spec.placements_max - spec.placements_min,
                             static_cast<int>(u(rng) * (spec.placements_max - spec.placements_min + 1)));
    ss.scale_min = spec.scale_min;
    ss.scale_max = spec.scale_max;
    ss.rotation_min = spec.rotation_min;
    ss.rotation_max = spec.rotation_max;
    ss.same_pattern = spec.same_pattern;
    ss.distractors = spec.distractors;
    ss.texture = spec.texture;
    ss.noise_sigma = spec.noise_sigma;
    ss.gradient_amplitude = spec.gradient_min + (spec.gradient_max - spec.gradient_min) * u(rng);
    for (double& c : ss.color_cast) c = 1.0 + spec.color_cast * (2 * u(rng) - 1);
    ss.product_blur = spec.product_blur;
    ss.product_contrast = spec.product_contrast;

    std::vector<NamedImage> present;
    std::vector<NamedImage> decoys;
    if (spec.kind == SuiteKind::Positive) {
        present.assign(library.begin(), library.end());
        for (const NamedImage& p : library) sc.tested.push_back(p.id);
    } else {
        const NamedImage& tested = library[index % library.size()];
        sc.tested.push_back(tested.id);
        for (const NamedImage& p : library) {
            if (p.id != tested.id) present.push_back(p);
        }
        if (present.empty()) ss.placements = 0;
        if (u(rng) < spec.decoy_rate) {
            const int k = index % static_cast<int>(library.size());
            decoys.push_back({tested.id + "_edition",
                              generate_product_art(mix(spec.seed, 1000 + k), spec.pattern_w, spec.pattern_h, 1)});
            ss.decoys = 1;
        }
    }
    auto [img, truth] = generate_scene(ss, present, distractors, decoys);
    sc.image = std::move(img);
    sc.truth = std::move(truth);
    return sc;
}

BenchResult run_suite(const SuiteSpec& spec, const RunConfig& cfg, const ProgressFn& progress) {
    validate(spec);
    validate(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const auto library = suite_library(spec);
    const auto distractors = suite_distractors(spec);
    std::map<std::string, ProductPatterns> prepared;
    std::map<std::string, double> radius;
    for (const NamedImage& p : library) {
        prepared.emplace(p.id, prepare_product(p.id, p.image, cfg));
        radius[p.id] = window_size(std::max(p.image.width(), p.image.height()));
    }
    const RadiusFn radius_fn = [&](const std::string& id) {
        const auto it = radius.find(id);
        return it == radius.end() ? 0.0 : it->second;
    };

    BenchResult res;
    res.spec = spec;
    std::vector<SceneScore> merged_scores, phase1_scores;
    for (int i = 0; i < spec.scenes; ++i) {
        SuiteScene sc = make_suite_scene(spec, i, library, distractors);
        const SceneContext scene = make_scene_context(sc.spec.scene_id, std::move(sc.image), cfg.extractor);

        DetectionReport merged, phase1;
        merged.scene_id = phase1.scene_id = scene.scene_id;
        std::vector<Occurrence> all_merged, all_phase1;
        for (const std::string& id : sc.tested) {
            const TwoPhaseResult r = run_two_phase(scene, prepared.at(id), cfg);
            all_merged.insert(all_merged.end(), r.merged.begin(), r.merged.end());
            all_phase1.insert(all_phase1.end(), r.phase1.begin(), r.phase1.end());
            merged.products.push_back(id);
            phase1.products.push_back(id);
        }
        merged.occurrences = consolidate(all_merged, ConsolidationMode::CrossPattern, cfg.pipeline.iou_threshold);
        phase1.occurrences = consolidate(all_phase1, ConsolidationMode::CrossPattern, cfg.pipeline.iou_threshold);

        const std::set<std::string> tested(sc.tested.begin(), sc.tested.end());
        GroundTruth truth = sc.truth;
        std::erase_if(truth.placements, [&](const Placement& p) { return !tested.count(p.pattern_id); });

        const SceneScore ms = score_scene(merged, truth, radius_fn);
        const SceneScore ps = score_scene(phase1, truth, radius_fn);
        SceneRow row;
        row.scene_id = scene.scene_id;
        row.placements = truth.placements.size();
        row.tested = sc.tested.size();
        row.occurrences = merged.occurrences.size();
        row.matched = ms.matched;
        for (const auto& [k, v] : ms.false_per_process) row.false_positives += v;
        row.phase1_matched = ps.matched;
        for (const auto& [k, v] : ps.false_per_process) row.phase1_false_positives += v;
        for (double e : ms.localization_errors) row.max_localization_error = std::max(row.max_localization_error, e);
        res.rows.push_back(row);
        merged_scores.push_back(ms);
        phase1_scores.push_back(ps);
        if (progress) progress(row);
    }
    res.metrics = summarize(merged_scores);
    res.phase1_metrics = summarize(phase1_scores);
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

std::string rows_to_csv(std::span<const SceneRow> rows) {
    std::ostringstream os;
    os << "scene_id,placements,tested,occurrences,matched,false_positives,phase1_matched,phase1_false_positives,"
          "max_localization_error\n";
    for (const SceneRow& r : rows) {
        char err[32];
        std::snprintf(err, sizeof err, "%.3f", r.max_localization_error);
        os << r.scene_id << ',' << r.placements << ',' << r.tested << ',' << r.occurrences << ',' << r.matched << ','
           << r.false_positives << ',' << r.phase1_matched << ',' << r.phase1_false_positives << ',' << err << '\n';
    }
    return os.str();
}

namespace {

json metrics_json(const Metrics& m) {
    return {{"placements", m.placements},
            {"matched", m.matched},
            {"processes", m.processes},
            {"processes_with_false", m.processes_with_false},
            {"false_positives", m.false_positives},
            {"detection_rate", m.detection_rate},
            {"false_detection_chance", m.false_detection_chance},
            {"avg_false_detections", m.avg_false_detections},
            {"max_localization_error", m.max_localization_error},
            {"mean_localization_error", m.mean_localization_error}};
}

}  // namespace

std::string metrics_to_json(const Metrics& m) { return metrics_json(m).dump(2); }

std::string bench_to_json(const BenchResult& r, int indent) {
    const json j = {{"suite", json::parse(suite_to_json(r.spec, -1))},
                    {"metrics", metrics_json(r.metrics)},
                    {"phase1_metrics", metrics_json(r.phase1_metrics)},
                    {"seconds", r.seconds},
                    {"reference",
                     {{"detection_rate_12mpx", reference::kDetectionRate12MPx},
                      {"false_detection_chance_12mpx", reference::kFalseChance12MPx},
                      {"detection_rate_3mpx", reference::kDetectionRate3MPx},
                      {"false_detection_chance_3mpx", reference::kFalseChance3MPx},
                      {"avg_false_detections_12mpx", reference::kAvgFalse12MPx},
                      {"avg_false_detections_3mpx", reference::kAvgFalse3MPx}}}};
    return j.dump(indent);
}

}  // namespace shelfscan

#include "shelfscan/error.hpp"
#include "shelfscan/evalkit.hpp"
#include "shelfscan/pipeline.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

using namespace shelfscan;
namespace fs = std::filesystem;

namespace {

RunConfig exact_config() {
    RunConfig cfg;
    cfg.matching.index.checks = 0;
    return cfg;
}

struct Planted {
    SceneContext scene;
    GroundTruth truth;
};

Planted plant(std::uint64_t seed, int placements, const RasterImage& art, double rot = 0, double scale = 1,
              double gradient = 0, int width = 560, int height = 420) {
    SceneSpec spec;
    spec.scene_id = "planted_" + std::to_string(seed);
    spec.width = width;
    spec.height = height;
    spec.seed = seed;
    spec.placements = placements;
    spec.rotation_min = -rot;
    spec.rotation_max = rot;
    spec.scale_min = scale;
    spec.scale_max = scale;
    spec.noise_sigma = 4;
    spec.gradient_amplitude = gradient;
    const std::vector<NamedImage> lib{{"art", art}};
    auto [img, truth] = generate_scene(spec, lib);
    return {make_scene_context(spec.scene_id, std::move(img), {}), std::move(truth)};
}

const RasterImage& art() {
    static const RasterImage a = generate_product_art(1234);
    return a;
}

const ProductPatterns& product() {
    static const ProductPatterns p = prepare_product("art", art(), exact_config());
    return p;
}

double center_error(const Occurrence& o, const Placement& p) {
    return std::hypot(o.envelope.center_x - p.center_x, o.envelope.center_y - p.center_y);
}

Occurrence occ(std::string id, double cx, double cy, double w, double h, double sum, double norm = 0) {
    Occurrence o;
    o.pattern_id = std::move(id);
    o.entry_id = o.pattern_id;
    o.envelope = {cx, cy, w, h, 0};
    o.adjacency_sum = sum;
    o.normalized_adjacency = norm;
    o.vote_count = 7;
    return o;
}

bool same(const std::vector<Occurrence>& a, const std::vector<Occurrence>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].pattern_id != b[i].pattern_id || a[i].adjacency_sum != b[i].adjacency_sum ||
            a[i].envelope.center_x != b[i].envelope.center_x || a[i].envelope.center_y != b[i].envelope.center_y ||
            a[i].normalized_adjacency != b[i].normalized_adjacency) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("size cascade dimensions") {
    using D = std::vector<std::pair<int, int>>;
    CHECK(size_cascade_dims(700, 500, 100) == D{{700, 500}, {350, 250}, {175, 125}});
    CHECK(size_cascade_dims(90, 90, 100) == D{{90, 90}});
    CHECK(size_cascade_dims(200, 100, 100) == D{{200, 100}, {100, 50}});
}

TEST_CASE("size cascade entries") {
    const auto& p = product();
    REQUIRE(p.cascade.size() == 2);
    CHECK(p.base().pattern_id == "art");
    CHECK_FALSE(p.base().parent_id.has_value());
    const PatternEntry& half = p.cascade[1];
    CHECK(half.image.width() == 120);
    CHECK(half.image.height() == 90);
    CHECK(half.scale_step == 1);
    CHECK(half.parent_id == std::optional<std::string>("art"));
    CHECK(half.product_id == "art");
    CHECK(half.original_feature_count == p.base().features.size());
    CHECK(half.features.size() < p.base().features.size());
    CHECK(half.features.image_w == 120);

    const PatternEntry small = make_pattern_entry("tiny", generate_product_art(3, 90, 90), {});
    CHECK(build_size_cascade(small, 100, {}).size() == 1);
    CHECK_THROWS_AS(make_pattern_entry("none", RasterImage{}, {}), InvalidArgument);
}

TEST_CASE("single pattern detection") {
    const RunConfig cfg = exact_config();
    const int w = window_size(240);

    const Planted one = plant(5, 1, art());
    const auto found = detect_single_pattern(one.scene, product().base(), cfg);
    REQUIRE(found.size() >= 1);
    const auto& truth = one.truth.placements.at(0);
    const auto best = std::min_element(found.begin(), found.end(), [&](const auto& a, const auto& b) {
        return center_error(a, truth) < center_error(b, truth);
    });
    CHECK(center_error(*best, truth) <= w);
    for (const Occurrence& o : found) {
        CHECK(o.vote_count > 6);
        CHECK(o.phase == 1);
        CHECK(o.normalized_adjacency ==
              doctest::Approx(o.adjacency_sum / static_cast<double>(product().base().original_feature_count)));
    }

    const Planted blank = plant(6, 0, art());
    PatternDiagnostics diag;
    CHECK(detect_single_pattern(blank.scene, product().base(), cfg, &diag).empty());
    CHECK(diag.entry_id == "art");

    const Planted two = plant(7, 2, art());
    const auto pair = detect_single_pattern(two.scene, product().base(), cfg, &diag);
    CHECK(pair.size() == 2);
    CHECK(diag.accepted == pair.size());
    for (std::size_t i = 0; i < pair.size(); ++i)
        for (std::size_t j = i + 1; j < pair.size(); ++j) CHECK(iou(pair[i].box(), pair[j].box()) < 0.5);
    for (const Placement& p : two.truth.placements) {
        double e = 1e9;
        for (const Occurrence& o : pair) e = std::min(e, center_error(o, p));
        CHECK(e <= w);
    }
}

TEST_CASE("consolidation examples") {
    std::vector<Occurrence> v{occ("a", 50, 50, 100, 100, 3.0, 0.3), occ("a", 55, 52, 100, 100, 2.0, 0.2)};
    REQUIRE(iou(v[0].box(), v[1].box()) >= 0.8);
    auto out = consolidate(v, ConsolidationMode::SamePattern, 0.5);
    REQUIRE(out.size() == 1);
    CHECK(out[0].adjacency_sum == doctest::Approx(5.0));
    CHECK(out[0].envelope.center_x == 50);

    v = {occ("a", 50, 50, 20, 20, 1), occ("a", 150, 50, 20, 20, 2)};
    CHECK(consolidate(v, ConsolidationMode::SamePattern, 0.5).size() == 2);
    CHECK(consolidate(v, ConsolidationMode::CrossPattern, 0.5).size() == 2);

    v = {occ("a", 50, 50, 100, 100, 9.0, 0.01), occ("b", 52, 50, 100, 100, 1.0, 0.02)};
    out = consolidate(v, ConsolidationMode::CrossPattern, 0.5);
    REQUIRE(out.size() == 1);
    CHECK(out[0].pattern_id == "b");
    CHECK(consolidate(v, ConsolidationMode::SamePattern, 0.5).size() == 2);

    // overlap is transitive through a chain
    v = {occ("a", 0, 0, 100, 100, 1), occ("a", 30, 0, 100, 100, 1), occ("a", 60, 0, 100, 100, 1)};
    CHECK(iou(v[0].box(), v[2].box()) < 0.5);
    CHECK(consolidate(v, ConsolidationMode::SamePattern, 0.5).size() == 1);

    CHECK_THROWS_AS(consolidate(v, ConsolidationMode::SamePattern, 0.0), InvalidArgument);
}

TEST_CASE("consolidation is idempotent") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0, 1);
    const char* ids[] = {"a", "b", "c"};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Occurrence> v;
        const int n = 1 + trial % 25;
        for (int i = 0; i < n; ++i) {
            v.push_back(occ(ids[i % 3], u(rng) * 400, u(rng) * 300, 40 + u(rng) * 80, 40 + u(rng) * 80,
                            std::round(u(rng) * 8) / 2, std::round(u(rng) * 8) / 200));
        }
        for (auto mode : {ConsolidationMode::SamePattern, ConsolidationMode::CrossPattern}) {
            const auto once = consolidate(v, mode, 0.5);
            const auto twice = consolidate(once, mode, 0.5);
            CHECK(same(once, twice));
            for (std::size_t i = 0; i < once.size(); ++i)
                for (std::size_t j = i + 1; j < once.size(); ++j)
                    if (mode == ConsolidationMode::CrossPattern || once[i].pattern_id == once[j].pattern_id)
                        CHECK(iou(once[i].box(), once[j].box()) < 0.5);
            std::vector<Occurrence> rev(v.rbegin(), v.rend());
            CHECK(same(consolidate(rev, mode, 0.5), once));
        }
    }
}

TEST_CASE("two phase protocol") {
    const RunConfig cfg = exact_config();
    const Planted one = plant(21, 1, art(), 10, 0.9);
    const TwoPhaseResult r = run_two_phase(one.scene, product(), cfg);
    REQUIRE(r.phase1.size() >= 1);
    REQUIRE(r.scene_pattern.has_value());
    CHECK(r.scene_pattern->phase == 2);
    CHECK(r.scene_pattern->original_feature_count == product().base().original_feature_count);
    CHECK(r.phase2.size() >= 1);
    REQUIRE(r.merged.size() == 1);
    CHECK(center_error(r.merged[0], one.truth.placements[0]) <= window_size(240));
    CHECK(r.diagnostics.size() == product().cascade.size() + 1);

    const Planted none = plant(22, 0, art());
    const TwoPhaseResult e = run_two_phase(none.scene, product(), cfg);
    CHECK(e.phase1.empty());
    CHECK_FALSE(e.scene_pattern.has_value());
    CHECK(e.phase2.empty());
    CHECK(e.merged.empty());
    CHECK(e.diagnostics.size() == product().cascade.size());

    const Planted three = plant(23, 3, art(), 5, 1.0, 0.5, 800, 600);
    const TwoPhaseResult t = run_two_phase(three.scene, product(), cfg);
    CHECK(t.merged.size() >= t.phase1.size());
}

TEST_CASE("multi product detection") {
    const RunConfig cfg = exact_config();
    const Planted one = plant(31, 1, art(), 8, 1.1);
    const std::vector<ProductPatterns> single{product()};
    const DetectionReport rep = run_multi_product(one.scene, single, cfg);
    const TwoPhaseResult direct = run_two_phase(one.scene, product(), cfg);
    CHECK(same(rep.occurrences, direct.merged));
    CHECK(rep.products == std::vector<std::string>{"art"});
    CHECK(rep.scene_id == one.scene.scene_id);

    // a second product that depicts the same object: one detection survives
    const std::vector<ProductPatterns> both{product(), prepare_product("art_soft", gaussian_blur(art(), 1.0), cfg)};
    const DetectionReport two = run_multi_product(one.scene, both, cfg);
    REQUIRE(two.occurrences.size() == 1);
    const TwoPhaseResult soft = run_two_phase(one.scene, both[1], cfg);
    REQUIRE_FALSE(soft.merged.empty());
    const double best = std::max(direct.merged.at(0).normalized_adjacency, soft.merged.at(0).normalized_adjacency);
    CHECK(two.occurrences[0].normalized_adjacency == best);

    for (const Occurrence& o : two.occurrences) {
        const auto& p = o.pattern_id == "art" ? both[0] : both[1];
        CHECK(o.normalized_adjacency <= o.adjacency_sum / static_cast<double>(p.base().original_feature_count) + 1e-9);
    }
    CHECK_THROWS_AS(run_multi_product(one.scene, std::vector<ProductPatterns>{}, cfg), InvalidArgument);
}

TEST_CASE("normalization always uses the base pattern feature count") {
    const RunConfig cfg = exact_config();
    const ProductPatterns big = prepare_product("big", generate_product_art(77, 320, 240), cfg);
    REQUIRE(big.cascade.size() == 2);
    SceneSpec spec;
    spec.width = 640;
    spec.height = 480;
    spec.seed = 3;
    spec.placements = 2;
    spec.scale_min = 0.5;
    spec.scale_max = 0.55;
    const std::vector<NamedImage> lib{{"big", big.base().image}};
    auto [img, truth] = generate_scene(spec, lib);
    const SceneContext scene = make_scene_context("s", std::move(img), {});
    const TwoPhaseResult r = run_two_phase(scene, big, cfg);
    std::vector<Occurrence> all = r.phase2;
    for (const auto& entry : big.cascade)
        for (const Occurrence& o : detect_single_pattern(scene, entry, cfg)) all.push_back(o);
    REQUIRE_FALSE(all.empty());
    bool from_half = false;
    for (const Occurrence& o : all) {
        CHECK(o.normalized_adjacency ==
              doctest::Approx(o.adjacency_sum / static_cast<double>(big.base().original_feature_count)));
        from_half |= o.entry_id == "big~s1";
    }
    CHECK(from_half);
}

TEST_CASE("raising cascade thresholds never adds detections") {
    const Planted s = plant(41, 3, art(), 15, 1.0, 0, 800, 600);
    const std::vector<ProductPatterns> ps{product()};
    const RunConfig base = exact_config();
    const std::size_t n0 = run_multi_product(s.scene, ps, base).occurrences.size();
    CHECK(n0 >= 1);
    RunConfig c = base;
    c.cascade.min_votes = 12;
    CHECK(run_multi_product(s.scene, ps, c).occurrences.size() <= n0);
    c = base;
    c.cascade.ncc_threshold = 0.75;
    CHECK(run_multi_product(s.scene, ps, c).occurrences.size() <= n0);
    c = base;
    c.cascade.adjacency_divisor = 20;
    CHECK(run_multi_product(s.scene, ps, c).occurrences.size() <= n0);
    c = base;
    c.cascade.hamming_reject_frac = 0.1;
    CHECK(run_multi_product(s.scene, ps, c).occurrences.size() <= n0);
    c = base;
    c.cascade.rot_var_factor = 0.01;
    CHECK(run_multi_product(s.scene, ps, c).occurrences.size() <= n0);
}

TEST_CASE("report json") {
    const Planted s = plant(51, 2, art());
    const std::vector<ProductPatterns> ps{product()};
    const DetectionReport rep = run_multi_product(s.scene, ps, exact_config());
    const std::string text = report_to_json(rep);
    const DetectionReport back = report_from_json(text);
    CHECK(report_to_json(back) == text);
    CHECK(same(back.occurrences, rep.occurrences));
    CHECK(back.diagnostics.size() == rep.diagnostics.size());
    CHECK(text.find("\"diagnostics\"") != std::string::npos);
    CHECK(text.find("\"normalized_adjacency\"") != std::string::npos);
    CHECK_THROWS_AS(report_from_json("{]"), ParseError);
    CHECK_THROWS_AS(report_from_json(R"({"scene": 3})"), ParseError);
}

TEST_CASE("debug images: one per entry and phase attempted") {
    const fs::path dir = fs::temp_directory_path() / "shelfscan_unit_debug";
    fs::remove_all(dir);
    RunConfig cfg = exact_config();
    cfg.pipeline.debug_dir = dir.string();
    const Planted s = plant(61, 1, art());
    const TwoPhaseResult r = run_two_phase(s.scene, product(), cfg);
    std::size_t pngs = 0;
    for (const auto& e : fs::directory_iterator(dir)) pngs += e.path().extension() == ".png";
    CHECK(pngs == product().cascade.size() + (r.scene_pattern ? 1 : 0));
    CHECK(fs::exists(dir / "art_1_0.png"));
    CHECK(fs::exists(dir / "art_1_1.png"));
    if (r.scene_pattern) CHECK(fs::exists(dir / "art_2_0.png"));
    fs::remove_all(dir);
}

}

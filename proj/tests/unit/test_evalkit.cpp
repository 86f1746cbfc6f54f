#include "shelfscan/error.hpp"
#include "shelfscan/evalkit.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace shelfscan;

namespace {

Occurrence found(std::string id, double x, double y, double norm) {
    Occurrence o;
    o.pattern_id = std::move(id);
    o.envelope = {x, y, 240, 180, 0};
    o.normalized_adjacency = norm;
    o.adjacency_sum = norm * 100;
    o.vote_count = 10;
    return o;
}

GroundTruth truth_of(std::vector<Placement> p) {
    GroundTruth t;
    t.scene_id = "t";
    t.width = 1024;
    t.height = 768;
    t.placements = std::move(p);
    return t;
}

Placement at(std::string id, double x, double y) { return {std::move(id), x, y, 1.0, 0.0, 240, 180}; }

const RadiusFn kRadius = [](const std::string&) { return 7.0; };

}  // namespace

TEST_SUITE("evalkit") {

TEST_CASE("product art") {
    const RasterImage a = generate_product_art(9);
    CHECK(a.width() == 240);
    CHECK(a.height() == 180);
    CHECK(a.channels() == 3);
    CHECK(generate_product_art(9) == a);
    CHECK_FALSE(generate_product_art(10) == a);
    const RasterImage edition = generate_product_art(9, 240, 180, 1);
    CHECK_FALSE(edition == a);
    CHECK(generate_product_art(9, 100, 80).width() == 100);
}

TEST_CASE("scene generation: empty, identity, determinism") {
    SceneSpec spec;
    spec.width = 400;
    spec.height = 300;
    spec.seed = 17;
    auto [bg, t0] = generate_scene(spec, {});
    CHECK(t0.placements.empty());
    CHECK(bg.width() == 400);
    CHECK(t0.width == 400);

    const RasterImage art = generate_product_art(3, 120, 90);
    const std::vector<NamedImage> lib{{"p", art}};
    spec.placements = 1;
    auto [img, truth] = generate_scene(spec, lib);
    REQUIRE(truth.placements.size() == 1);
    const Placement& p = truth.placements[0];
    CHECK(p.pattern_id == "p");
    CHECK(p.pattern_w == 120);
    const int x0 = static_cast<int>(std::lround(p.center_x - 59.5));
    const int y0 = static_cast<int>(std::lround(p.center_y - 44.5));
    CHECK(x0 - (p.center_x - 59.5) == 0);
    std::size_t diff = 0;
    for (int y = 0; y < 90; ++y)
        for (int x = 0; x < 120; ++x)
            for (int c = 0; c < 3; ++c) diff += img.at(x0 + x, y0 + y, c) != art.at(x, y, c);
    CHECK(diff == 0);

    auto [again, truth2] = generate_scene(spec, lib);
    CHECK(again == img);
    CHECK(truth_to_json(truth2) == truth_to_json(truth));
    spec.seed = 18;
    CHECK_FALSE(generate_scene(spec, lib).first == img);
}

TEST_CASE("scene generation: transforms, noise and errors") {
    const RasterImage art = generate_product_art(4, 120, 90);
    const std::vector<NamedImage> lib{{"p", art}, {"q", generate_product_art(5, 120, 90)}};
    SceneSpec spec;
    spec.width = 640;
    spec.height = 480;
    spec.placements = 4;
    spec.scale_min = 0.6;
    spec.scale_max = 1.4;
    spec.rotation_min = -25;
    spec.rotation_max = 25;
    spec.noise_sigma = 8;
    spec.gradient_amplitude = 0.3;
    spec.distractors = 3;
    const std::vector<NamedImage> others{{"d", generate_product_art(99, 80, 80)}};
    auto [img, truth] = generate_scene(spec, lib, others);
    REQUIRE(truth.placements.size() == 4);
    for (const Placement& p : truth.placements) {
        CHECK(p.scale >= 0.6);
        CHECK(p.scale <= 1.4);
        CHECK(std::fabs(p.rotation) <= 25);
        const BoxD bb = Envelope{p.center_x, p.center_y, 120 * p.scale, 90 * p.scale, p.rotation}.bounding_box();
        CHECK(bb.x0 >= 0);
        CHECK(bb.y0 >= 0);
        CHECK(bb.x1 <= 639);
        CHECK(bb.y1 <= 479);
    }
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) {
            const auto& a = truth.placements[i];
            const auto& b = truth.placements[j];
            const BoxD ba = Envelope{a.center_x, a.center_y, 120 * a.scale, 90 * a.scale, a.rotation}.bounding_box();
            const BoxD bb = Envelope{b.center_x, b.center_y, 120 * b.scale, 90 * b.scale, b.rotation}.bounding_box();
            CHECK(iou(ba, bb) == 0);
        }

    spec.placements = 40;
    CHECK_THROWS_AS(generate_scene(spec, lib), InvalidArgument);
    spec.placements = 1;
    CHECK_THROWS_AS(generate_scene(spec, {}), InvalidArgument);
    spec.rotation_max = 40;
    CHECK_THROWS_AS(generate_scene(spec, lib), InvalidArgument);
    spec.rotation_max = 10;
    spec.scale_max = 3;
    CHECK_THROWS_AS(generate_scene(spec, lib), InvalidArgument);
}

TEST_CASE("truth json round trip") {
    GroundTruth t = truth_of({at("a", 10.5, 20.25), at("b", 300, 200)});
    t.placements[1].scale = 1.37;
    t.placements[1].rotation = -12.5;
    const GroundTruth back = truth_from_json(truth_to_json(t));
    CHECK(truth_to_json(back) == truth_to_json(t));
    REQUIRE(back.placements.size() == 2);
    CHECK(back.placements[1].scale == 1.37);
    CHECK(back.placements[0].center_y == 20.25);
    CHECK_THROWS_AS(truth_from_json("nope"), ParseError);
    CHECK_THROWS_AS(truth_from_json(R"({"scene_id": "x", "placements": 3})"), ParseError);
}

TEST_CASE("scoring examples") {
    const GroundTruth t = truth_of({at("a", 100, 100), at("a", 400, 100), at("b", 700, 300)});
    DetectionReport perfect;
    perfect.products = {"a", "b"};
    perfect.occurrences = {found("a", 101, 99, .3), found("a", 403, 102, .2), found("b", 700, 304, .1)};
    Metrics m = score(perfect, t, kRadius);
    CHECK(m.detection_rate == 1.0);
    CHECK(m.false_detection_chance == 0.0);
    CHECK(m.avg_false_detections == 0.0);
    CHECK(m.processes == 2);
    CHECK(m.max_localization_error == doctest::Approx(4.0));

    DetectionReport empty;
    empty.products = {"a", "b"};
    m = score(empty, t, kRadius);
    CHECK(m.detection_rate == 0.0);
    CHECK(m.false_detection_chance == 0.0);

    const GroundTruth one = truth_of({at("a", 100, 100)});
    DetectionReport noisy;
    noisy.products = {"a"};
    noisy.occurrences = {found("a", 100, 100, .5), found("a", 600, 100, .4), found("a", 800, 500, .3)};
    m = score(noisy, one, kRadius);
    CHECK(m.detection_rate == 1.0);
    CHECK(m.false_detection_chance == 1.0);
    CHECK(m.avg_false_detections == 2.0);
    CHECK(m.false_positives == 2);

    // a duplicate of one placement counts once, the rest is false
    DetectionReport dup;
    dup.products = {"a"};
    dup.occurrences = {found("a", 101, 100, .5), found("a", 99, 100, .4)};
    m = score(dup, one, kRadius);
    CHECK(m.matched == 1);
    CHECK(m.false_positives == 1);

    // wrong product or out of radius never matches
    DetectionReport wrong;
    wrong.products = {"a", "b"};
    wrong.occurrences = {found("b", 100, 100, .5), found("a", 110, 100, .4)};
    m = score(wrong, one, kRadius);
    CHECK(m.matched == 0);
    CHECK(m.false_positives == 2);
    CHECK(m.false_detection_chance == 1.0);
    CHECK(m.avg_false_detections == 1.0);
}

TEST_CASE("greedy matching prefers the strongest occurrence") {
    const GroundTruth t = truth_of({at("a", 100, 100)});
    DetectionReport r;
    r.products = {"a"};
    r.occurrences = {found("a", 105, 100, .1), found("a", 101, 100, .9)};
    const SceneScore s = score_scene(r, t, kRadius);
    REQUIRE(s.localization_errors.size() == 1);
    CHECK(s.localization_errors[0] == doctest::Approx(1.0));
}

TEST_CASE("score ignores occurrence order") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Placement> ps;
        for (int i = 0; i < 4; ++i) ps.push_back(at(i % 2 ? "a" : "b", 100 + 200 * i, 100 + u(rng) * 500));
        const GroundTruth t = truth_of(ps);
        DetectionReport r;
        r.products = {"a", "b", "c"};
        for (int i = 0; i < 8; ++i) {
            const Placement& p = ps[i % 4];
            const char* id = i % 5 == 0 ? "c" : p.pattern_id.c_str();
            r.occurrences.push_back(found(id, p.center_x + (u(rng) - 0.5) * 16, p.center_y + (u(rng) - 0.5) * 16,
                                          std::round(u(rng) * 4) / 4));
        }
        const Metrics m = score(r, t, kRadius);
        std::shuffle(r.occurrences.begin(), r.occurrences.end(), rng);
        const Metrics n = score(r, t, kRadius);
        CHECK(m.matched == n.matched);
        CHECK(m.false_positives == n.false_positives);
        CHECK(m.processes_with_false == n.processes_with_false);
        CHECK(m.max_localization_error == doctest::Approx(n.max_localization_error));
        CHECK(m.detection_rate >= 0);
        CHECK(m.detection_rate <= 1);
        if (m.processes_with_false) CHECK(m.avg_false_detections >= 1.0);
    }
}

TEST_CASE("summaries pool scenes") {
    SceneScore a, b;
    a.placements = 3;
    a.matched = 3;
    a.false_per_process = {{"x", 0}, {"y", 2}};
    b.placements = 1;
    b.matched = 0;
    b.false_per_process = {{"x", 1}, {"y", 0}};
    const std::vector<SceneScore> both{a, b};
    const Metrics m = summarize(both);
    CHECK(m.detection_rate == 0.75);
    CHECK(m.processes == 4);
    CHECK(m.processes_with_false == 2);
    CHECK(m.false_detection_chance == 0.5);
    CHECK(m.avg_false_detections == 1.5);
    CHECK(default_match_radius(at("a", 0, 0)) == window_size(240));
}

TEST_CASE("suite specs") {
    SuiteSpec s;
    s.name = "neg";
    s.kind = SuiteKind::Negative;
    s.scenes = 3;
    s.decoy_rate = 0.5;
    s.color_cast = 0.2;
    const SuiteSpec back = suite_from_json(suite_to_json(s));
    CHECK(suite_to_json(back) == suite_to_json(s));
    CHECK(back.kind == SuiteKind::Negative);
    CHECK(back.decoy_rate == 0.5);

    CHECK_THROWS_AS(suite_from_json(R"({"scenes": 0})"), ConfigError);
    CHECK_THROWS_AS(suite_from_json(R"({"scenes": 2, "bogus": 1})"), ConfigError);
    CHECK_THROWS_AS(suite_from_json(R"({"kind": "sideways"})"), ConfigError);
    CHECK_THROWS_AS(suite_from_json("[]"), ConfigError);

    const auto lib = suite_library(s);
    CHECK(lib.size() == 6);
    CHECK(lib[0].id == "product_00");
    const auto distract = suite_distractors(s);
    CHECK(distract.size() == 8);

    s.kind = SuiteKind::Negative;
    s.width = 640;
    s.height = 480;
    s.placements_min = 2;
    s.placements_max = 3;
    s.scale_max = 1.2;
    for (int i = 0; i < 3; ++i) {
        const SuiteScene sc = make_suite_scene(s, i, lib, distract);
        REQUIRE(sc.tested.size() == 1);
        for (const Placement& p : sc.truth.placements) CHECK(p.pattern_id != sc.tested[0]);
        const SuiteScene again = make_suite_scene(s, i, lib, distract);
        CHECK(again.image == sc.image);
    }
    s.kind = SuiteKind::Positive;
    const SuiteScene pos = make_suite_scene(s, 0, lib, distract);
    CHECK(pos.tested.size() == 6);
    CHECK(pos.truth.placements.size() >= 2);
}

TEST_CASE("reference figures are kept verbatim") {
    CHECK(reference::kDetectionRate12MPx == 0.890);
    CHECK(reference::kFalseChance12MPx == 0.0072);
    CHECK(reference::kDetectionRate3MPx == 0.844);
    CHECK(reference::kFalseChance3MPx == 0.0163);
    CHECK(reference::kAvgFalse12MPx == 3.07);
    CHECK(reference::kAvgFalse3MPx == 3.28);
}

}

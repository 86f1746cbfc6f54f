#include "shelfscan/error.hpp"
#include "shelfscan/votespace.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace shelfscan;

namespace {

Vote vote_at(double x, double y, double adj, int id = 0) {
    Vote v;
    v.pattern_idx = id;
    v.scene_idx = id;
    v.adjacency = adj;
    v.scene_x = x;
    v.scene_y = y;
    return v;
}

// Inside test through the four corners and edge cross products.
bool inside_rect(const Envelope& e, double x, double y) {
    const double r = e.rotation * 3.14159265358979323846 / 180.0;
    const double ux = std::cos(r) * e.width / 2, uy = std::sin(r) * e.width / 2;
    const double vx = -std::sin(r) * e.height / 2, vy = std::cos(r) * e.height / 2;
    const double cx[4] = {e.center_x - ux - vx, e.center_x + ux - vx, e.center_x + ux + vx, e.center_x - ux + vx};
    const double cy[4] = {e.center_y - uy - vy, e.center_y + uy - vy, e.center_y + uy + vy, e.center_y - uy + vy};
    for (int i = 0; i < 4; ++i) {
        const int j = (i + 1) % 4;
        const double cross = (cx[j] - cx[i]) * (y - cy[i]) - (cy[j] - cy[i]) * (x - cx[i]);
        if (cross < -1e-9) return false;
    }
    return true;
}

void check_consistent(const VoteSpace& vs) {
    std::size_t live = 0;
    for (int y = 0; y < vs.height(); ++y) {
        for (int x = 0; x < vs.width(); ++x) {
            double s = 0;
            for (auto i : vs.bucket(x, y)) {
                s += vs.vote(i).adjacency;
                REQUIRE(static_cast<int>(std::floor(vs.vote(i).scene_x)) == x);
            }
            live += vs.bucket(x, y).size();
            REQUIRE(vs.vote_image(x, y) == doctest::Approx(s).epsilon(1e-12));
        }
    }
    REQUIRE(live == vs.live_votes());
}

}  // namespace

TEST_SUITE("votespace") {

TEST_CASE("accumulate") {
    const std::vector<Vote> three{vote_at(4.2, 5.9, 0.5), vote_at(4.8, 5.1, 0.25), vote_at(4.0, 5.0, 0.25)};
    const VoteSpace vs = VoteSpace::accumulate(three, 10, 10);
    CHECK(vs.vote_image(4, 5) == 1.0);
    CHECK(vs.total_mass() == 1.0);

    const VoteSpace empty = VoteSpace::accumulate({}, 6, 4);
    CHECK(std::all_of(empty.vote_image().begin(), empty.vote_image().end(), [](double v) { return v == 0; }));

    const std::vector<Vote> one{vote_at(10.7, 20.2, 1)};
    CHECK(VoteSpace::accumulate(one, 30, 30).bucket(10, 20).size() == 1);

    const std::vector<Vote> bad{vote_at(1, 1, 1), vote_at(30.0, 2, 1)};
    try {
        VoteSpace::accumulate(bad, 30, 30);
        FAIL("expected rejection");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find('1') != std::string::npos);
    }
}

TEST_CASE("propositions: examples") {
    std::vector<Vote> spike{vote_at(7.5, 9.5, 0.7)};
    auto props = detect_propositions(VoteSpace::accumulate(spike, 20, 20), 5);
    REQUIRE(props.size() == 1);
    // equal sums form a 5x5 plateau around the spike; the tie goes to its top-left
    CHECK(props[0].x == 5);
    CHECK(props[0].y == 7);
    CHECK(props[0].window_adjacency_sum == doctest::Approx(0.7));

    const std::vector<Vote> two{vote_at(30, 10, 1), vote_at(5, 10, 1), vote_at(5, 11, 0.5), vote_at(30, 11, 0.5)};
    props = detect_propositions(VoteSpace::accumulate(two, 40, 20), 5);
    REQUIRE(props.size() == 2);
    CHECK(props[0].window_adjacency_sum == props[1].window_adjacency_sum);
    CHECK(props[0].x < props[1].x);

    std::vector<Vote> flat;
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 15; ++x) flat.push_back(vote_at(x + 0.5, y + 0.5, 0.25, y * 15 + x));
    props = detect_propositions(VoteSpace::accumulate(flat, 15, 12), 3);
    CHECK(props.size() == 1);

    CHECK(detect_propositions(VoteSpace(8, 8), 3).empty());
    CHECK_THROWS_AS(detect_propositions(VoteSpace(8, 8), 4), InvalidArgument);
}

TEST_CASE("propositions match brute force on random sparse spaces") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        const int w = 40 + trial % 7, h = 30 + trial % 5;
        const int win = 3 + 2 * (trial % 3);
        const auto votes = oracle::sparse_votes(rng, w, h, 20 + trial * 3);
        const VoteSpace vs = VoteSpace::accumulate(votes, w, h);
        const auto got = detect_propositions(vs, win, 0.01);
        const auto want = oracle::propositions(votes, w, h, win, 0.01);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].x == want[i].x);
            CHECK(got[i].y == want[i].y);
            CHECK(got[i].window_adjacency_sum == want[i].window_adjacency_sum);
        }
    }
}

TEST_CASE("erasure examples") {
    std::mt19937_64 rng(3);
    const auto votes = oracle::sparse_votes(rng, 50, 40, 300);

    VoteSpace all = VoteSpace::accumulate(votes, 50, 40);
    auto res = all.erase_region({25, 20, 200, 200, 0});
    CHECK(res.removed == 300);
    CHECK(all.live_votes() == 0);
    CHECK(all.total_mass() == 0);

    VoteSpace none = VoteSpace::accumulate(votes, 50, 40);
    res = none.erase_region({500, 500, 10, 10, 0});
    CHECK(res.removed == 0);
    CHECK(none.live_votes() == 300);

    const Envelope half{12, 20, 30, 50, 30};
    VoteSpace part = VoteSpace::accumulate(votes, 50, 40);
    const double before = part.total_mass();
    res = part.erase_region(half);
    std::size_t inside = 0;
    double inside_mass = 0;
    for (const Vote& v : votes) {
        if (inside_rect(half, v.scene_x, v.scene_y)) {
            ++inside;
            inside_mass += v.adjacency;
        }
    }
    CHECK(res.removed == inside);
    CHECK(res.removed_mass == doctest::Approx(inside_mass));
    CHECK(part.total_mass() == doctest::Approx(before - inside_mass).epsilon(1e-12));
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 50; ++x)
            for (auto i : part.bucket(x, y)) CHECK_FALSE(inside_rect(half, part.vote(i).scene_x, part.vote(i).scene_y));
    check_consistent(part);
}

TEST_CASE("interleaved accumulate and erase keep the projection consistent") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0, 1);
    VoteSpace vs(64, 48);
    double expected_mass = 0;
    for (int round = 0; round < 30; ++round) {
        const auto batch = oracle::sparse_votes(rng, 64, 48, 40);
        vs.add(batch);
        for (const Vote& v : batch) expected_mass += v.adjacency;
        const Envelope e{u(rng) * 64, u(rng) * 48, 4 + u(rng) * 20, 4 + u(rng) * 20, u(rng) * 360 - 180};
        const double mass = vs.total_mass();
        const auto res = vs.erase_region(e);
        expected_mass -= res.removed_mass;
        CHECK(vs.total_mass() == doctest::Approx(mass - res.removed_mass).epsilon(1e-12));
        CHECK(vs.total_mass() == doctest::Approx(expected_mass).epsilon(1e-12));
        check_consistent(vs);
    }
}

TEST_CASE("erased pixels are never proposed again") {
    std::mt19937_64 rng(19);
    const auto votes = oracle::sparse_votes(rng, 60, 60, 400);
    VoteSpace vs = VoteSpace::accumulate(votes, 60, 60);
    const Envelope e{30, 30, 24, 16, 20};
    vs.erase_region(e);
    for (const Proposition& p : detect_propositions(vs, 5, 0.0)) CHECK_FALSE(inside_rect(e, p.x, p.y));
}

TEST_CASE("debug rendering") {
    const RasterImage zero = render_debug(VoteSpace(17, 9), 2.0);
    CHECK(zero.width() == 17);
    CHECK(zero.height() == 9);
    CHECK(std::all_of(zero.data().begin(), zero.data().end(), [](auto v) { return v == 0; }));

    std::vector<Vote> spike{vote_at(20.5, 15.5, 0.3)};
    const RasterImage img = render_debug(VoteSpace::accumulate(spike, 41, 31), 2.0);
    CHECK(img.width() == 41);
    CHECK(img.height() == 31);
    CHECK(img.at(20, 15) == 255);
    CHECK(img.at(18, 15) == img.at(22, 15));
    CHECK(img.at(20, 13) == img.at(20, 17));
    CHECK(img.at(20, 15) > img.at(23, 15));
}

}

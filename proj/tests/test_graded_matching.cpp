#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "cntrack/graded_matching.hpp"
#include "oracles.hpp"

using namespace cntrack;

namespace {

// Template with uniform weights over a w x h box of the given label pattern.
TargetTemplate make_template(int w, int h, const std::function<int(int, int)>& label_of) {
    TargetTemplate t;
    t.bbox = {100, 100, w, h};
    t.labels = LabelMap(w, h);
    t.pixel_weights.assign(std::size_t(w) * h, 1.0);
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) t.labels.at(i, j) = std::uint8_t(label_of(i, j));
    }
    t.histogram.counts = {1, 1, 1, 1};
    t.histogram.total = 4;
    t.label_weights = {1.0, 1.0, 1.0, 1.0};
    t.components.push_back({{0, 0, w, h}, 1.0});
    return t;
}

// Frame labels considerably larger than the template, anchored at (60,60).
LabelMap make_frame_labels(int w, int h, const std::function<int(int, int)>& label_of) {
    LabelMap m(w, h);
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) m.labels[std::size_t(j) * w + i] = std::uint8_t(label_of(i, j));
    }
    return m;
}

}  // namespace

TEST_CASE("confidence worked cases") {
    // template: 8x8 of label 0; frame window: label 0 box at (100,100)+delta
    const auto tmpl = make_template(8, 8, [](int, int) { return 0; });
    const Vec2i origin{60, 60};

    SUBCASE("identical content at zero displacement") {
        const auto labels = make_frame_labels(100, 100, [&](int x, int y) {
            const int fx = x + 60, fy = y + 60;
            return (fx >= 100 && fx < 108 && fy >= 100 && fy < 108) ? 0 : 1;
        });
        CHECK(confidence(tmpl, labels, origin, {0, 0}) == doctest::Approx(1.0));
        CHECK(confidence(tmpl, labels, origin, {20, 0}) == doctest::Approx(0.0));
    }
    SUBCASE("half the pixels match under uniform weights") {
        const auto labels = make_frame_labels(100, 100, [&](int x, int y) {
            const int fx = x + 60;
            (void)y;
            return (fx >= 100 && fx < 104) ? 0 : 1;  // left half of the box
        });
        CHECK(confidence(tmpl, labels, origin, {0, 0}) == doctest::Approx(0.5));
    }
    SUBCASE("confidence is invariant to uniform weight scaling") {
        const auto labels = make_frame_labels(100, 100, [&](int x, int y) {
            return ((x + y) % 3 == 0) ? 0 : 2;
        });
        auto scaled = tmpl;
        for (auto& w : scaled.pixel_weights) w *= 7.25;
        const double a = confidence(tmpl, labels, origin, {1, -2});
        const double b = confidence(scaled, labels, origin, {1, -2});
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
    }
    SUBCASE("pixels shifted off the window count as mismatches") {
        // whole window is label 0, but a huge delta pushes the box outside
        const auto labels = make_frame_labels(100, 100, [](int, int) { return 0; });
        CHECK(confidence(tmpl, labels, origin, {500, 0}) == doctest::Approx(0.0));
    }
    SUBCASE("zero-weight template rejected") {
        auto zero = tmpl;
        std::fill(zero.pixel_weights.begin(), zero.pixel_weights.end(), 0.0);
        const auto labels = make_frame_labels(10, 10, [](int, int) { return 0; });
        CHECK_THROWS_AS(confidence(zero, labels, origin, {0, 0}), ContractError);
    }
}

TEST_CASE("displacement_bounds sign-aware intervals") {
    SUBCASE("positive estimate") {
        const auto c = displacement_bounds({10.0, 0.0});
        CHECK(c.dx_lo == doctest::Approx(5.0));
        CHECK(c.dx_hi == doctest::Approx(20.0));
        CHECK(c.dy_lo == doctest::Approx(-3.0));
        CHECK(c.dy_hi == doctest::Approx(3.0));
    }
    SUBCASE("negative estimate sorts the scaled endpoints") {
        const auto c = displacement_bounds({-10.0, 0.0});
        CHECK(c.dx_lo == doctest::Approx(-20.0));
        CHECK(c.dx_hi == doctest::Approx(-5.0));
    }
    SUBCASE("small estimates fall back to the symmetric radius") {
        const auto c = displacement_bounds({0.0, 0.0});
        CHECK(c.dx_lo == -3.0);
        CHECK(c.dx_hi == 3.0);
        CHECK(c.dy_lo == -3.0);
        CHECK(c.dy_hi == 3.0);
    }
    SUBCASE("interval contains lambda*d for all lambda in range") {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> d(-30.0, 30.0);
        for (int i = 0; i < 50; ++i) {
            const Vec2 est{d(rng), d(rng)};
            const auto c = displacement_bounds(est);
            for (double lam : {0.5, 0.8, 1.0, 1.7, 2.0}) {
                if (std::fabs(est.x) >= 3.0) {
                    CHECK(lam * est.x >= c.dx_lo - 1e-9);
                    CHECK(lam * est.x <= c.dx_hi + 1e-9);
                }
                if (std::fabs(est.y) >= 3.0) {
                    CHECK(lam * est.y >= c.dy_lo - 1e-9);
                    CHECK(lam * est.y <= c.dy_hi + 1e-9);
                }
            }
        }
    }
    SUBCASE("bad lambda order rejected") {
        CHECK_THROWS_AS(displacement_bounds({1, 1}, 2.0, 0.5), ContractError);
    }
}

namespace {

struct QuadraticField {
    double a, b, c;  // negative-definite quadratic coefficients
    Vec2 peak;
    double operator()(Vec2i o) const {
        const double dx = o.x - peak.x, dy = o.y - peak.y;
        return -(a * dx * dx + b * dy * dy + c * dx * dy);
    }
};

QuadraticField random_quadratic(std::mt19937& rng, const SearchConstraint& box) {
    std::uniform_real_distribution<double> coef(0.3, 2.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    QuadraticField q;
    q.a = coef(rng);
    q.b = coef(rng);
    q.c = (unit(rng) * 2.0 - 1.0) * 0.5 * std::min(q.a, q.b);
    q.peak = {box.dx_lo + unit(rng) * (box.dx_hi - box.dx_lo),
              box.dy_lo + unit(rng) * (box.dy_hi - box.dy_lo)};
    return q;
}

}  // namespace

TEST_CASE("feasible_direction_search basics") {
    const SearchConstraint box{-10, 10, -10, 10};

    SUBCASE("already at the optimum") {
        const QuadraticField q{1.0, 1.0, 0.0, {2.0, -3.0}};
        const auto r = feasible_direction_search(q, box, {2, -3});
        CHECK(r.offset == Vec2i{2, -3});
    }
    SUBCASE("start outside the box is clamped in") {
        const QuadraticField q{1.0, 1.0, 0.0, {0.0, 0.0}};
        const auto r = feasible_direction_search(q, box, {50, 50});
        CHECK(r.offset == Vec2i{0, 0});
    }
    SUBCASE("empty integer box rejected") {
        CHECK_THROWS_AS(
            feasible_direction_search([](Vec2i) { return 0.0; }, {0.2, 0.8, 0, 0}, {0, 0}),
            ContractError);
    }
}

TEST_CASE("feasible_direction_search equals exhaustive argmax on unimodal fields") {
    std::mt19937 rng(41);
    std::uniform_int_distribution<int> half(3, 10);
    std::uniform_int_distribution<int> center(-15, 15);
    for (int trial = 0; trial < 120; ++trial) {
        const int cx = center(rng), cy = center(rng), hx = half(rng), hy = half(rng);
        const SearchConstraint box{double(cx - hx), double(cx + hx), double(cy - hy),
                                   double(cy + hy)};
        const QuadraticField q = random_quadratic(rng, box);

        int outside = 0;
        auto guarded = [&](Vec2i o) {
            if (!box.contains(o)) ++outside;
            return q(o);
        };
        const auto got = feasible_direction_search(guarded, box,
                                                   {cx + (trial % 5) - 2, cy - (trial % 3)});
        const auto want = oracles::exhaustive_argmax(q, box);
        CHECK(outside == 0);
        CHECK(got.score == doctest::Approx(want.second).epsilon(1e-12));
        CHECK(got.offset == want.first);
    }
}

TEST_CASE("optimum outside the box ends on the boundary, never worse than start") {
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const SearchConstraint box{-8, 8, -8, 8};
        QuadraticField q{0.5 + unit(rng), 0.5 + unit(rng),
                         0.0, {30.0 + unit(rng) * 10.0, -25.0 - unit(rng) * 10.0}};
        const Vec2i start{int(unit(rng) * 16) - 8, int(unit(rng) * 16) - 8};
        const auto got = feasible_direction_search(q, box, start);
        const auto want = oracles::exhaustive_argmax(q, box);
        CHECK(box.contains(got.offset));
        CHECK(got.score >= q(start) - 1e-12);
        CHECK(got.offset == want.first);  // corner nearest the outside peak
    }
}

TEST_CASE("graded_match component behavior") {
    // 16x8 template, label 0 left half, label 1 right half; two components.
    TargetTemplate t;
    t.bbox = {50, 50, 16, 8};
    t.labels = LabelMap(16, 8);
    t.pixel_weights.assign(16 * 8, 1.0);
    for (int j = 0; j < 8; ++j) {
        for (int i = 0; i < 16; ++i) t.labels.at(i, j) = i < 8 ? 0 : 1;
    }
    t.histogram.counts = {64, 64};
    t.histogram.total = 128;
    t.label_weights = {1.0, 1.0};
    t.components.push_back({{0, 0, 8, 8}, 0.8});
    t.components.push_back({{8, 0, 8, 8}, 0.6});

    const Vec2i origin{20, 20};
    const SearchConstraint box{-8, 8, -8, 8};

    SUBCASE("clean shift recovered by all components") {
        // frame: the same two-tone pattern shifted by (5,0) from the anchor
        const auto labels = make_frame_labels(100, 60, [&](int x, int y) {
            const int fx = x + 20, fy = y + 20;
            const int lx = fx - (50 + 5), ly = fy - 50;
            if (lx >= 0 && lx < 16 && ly >= 0 && ly < 8) return lx < 8 ? 0 : 1;
            return 7;
        });
        const auto mr = graded_match(t, labels, origin, box, {0.0, 0.0});
        CHECK(mr.mode == MatchMode::Graded);
        CHECK_FALSE(mr.coasting);
        CHECK(mr.offset.x == doctest::Approx(5.0));
        CHECK(mr.offset.y == doctest::Approx(0.0));
        CHECK(mr.score == doctest::Approx(1.0));
        for (const auto& cm : mr.components) {
            CHECK_FALSE(cm.occluded);
            CHECK(cm.offset == Vec2i{5, 0});
        }
    }
    SUBCASE("occluded left half excluded, offset from the right component") {
        const auto labels = make_frame_labels(100, 60, [&](int x, int y) {
            const int fx = x + 20, fy = y + 20;
            const int lx = fx - (50 + 4), ly = fy - 50;
            if (lx >= 0 && lx < 16 && ly >= 0 && ly < 8) {
                return lx < 8 ? 9 : 1;  // left half painted over with label 9
            }
            return 7;
        });
        const auto mr = graded_match(t, labels, origin, box, {0.0, 0.0});
        REQUIRE(mr.components.size() == 2);
        // components are reported in priority order: left (0.8) first
        CHECK(mr.components[0].component == 0);
        CHECK(mr.components[0].occluded);
        CHECK_FALSE(mr.components[1].occluded);
        CHECK(std::fabs(mr.offset.x - 4.0) <= 1.0);
        CHECK(std::fabs(mr.offset.y - 0.0) <= 1.0);
    }
    SUBCASE("everything occluded coasts on the prior") {
        const auto labels = make_frame_labels(100, 60, [](int, int) { return 9; });
        const auto mr = graded_match(t, labels, origin, box, {2.0, -1.0});
        CHECK(mr.coasting);
        CHECK(mr.offset.x == 2.0);
        CHECK(mr.offset.y == -1.0);
        CHECK(mr.score == doctest::Approx(0.0));
    }
    SUBCASE("fused offset stays in the hull of surviving offsets") {
        std::mt19937 rng(47);
        std::uniform_int_distribution<int> shift(-4, 4);
        for (int trial = 0; trial < 20; ++trial) {
            const int sx = shift(rng), sy = shift(rng);
            const auto labels = make_frame_labels(100, 60, [&](int x, int y) {
                const int fx = x + 20, fy = y + 20;
                const int lx = fx - (50 + sx), ly = fy - (50 + sy);
                if (lx >= 0 && lx < 16 && ly >= 0 && ly < 8) return lx < 8 ? 0 : 1;
                return 7;
            });
            const auto mr = graded_match(t, labels, origin, box, {0.0, 0.0});
            if (mr.coasting) continue;
            int minx = 1 << 20, maxx = -(1 << 20), miny = 1 << 20, maxy = -(1 << 20);
            for (const auto& cm : mr.components) {
                if (cm.occluded) continue;
                minx = std::min(minx, cm.offset.x);
                maxx = std::max(maxx, cm.offset.x);
                miny = std::min(miny, cm.offset.y);
                maxy = std::max(maxy, cm.offset.y);
            }
            CHECK(mr.offset.x >= minx - 1e-9);
            CHECK(mr.offset.x <= maxx + 1e-9);
            CHECK(mr.offset.y >= miny - 1e-9);
            CHECK(mr.offset.y <= maxy + 1e-9);
        }
    }
    SUBCASE("template without components rejected") {
        auto bare = t;
        bare.components.clear();
        const auto labels = make_frame_labels(10, 10, [](int, int) { return 0; });
        CHECK_THROWS_AS(graded_match(bare, labels, origin, box, {0, 0}), ContractError);
    }
}

#include <doctest.h>

#include <numbers>

#include "sis/geometry.hpp"
#include "sis/random.hpp"

using namespace sis;

TEST_SUITE("geometry") {

TEST_CASE("unit square area, centroid and containment") {
    const Polygon sq{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
    CHECK(area(sq) == 16.0);
    CHECK(centroid(sq) == Vec2{2, 2});
    CHECK(contains(sq, {1, 1}));
    CHECK_FALSE(contains(sq, {5, 1}));
    CHECK(distance_to_boundary(sq, {1, 2}) == doctest::Approx(1.0));
}

TEST_CASE("clip_half_plane keeps the requested side") {
    const Polygon sq{{0, 0}, {4, 0}, {4, 4}, {0, 4}};
    const Line l{{2, 0}, {1, 0}};
    CHECK(area(clip_half_plane(sq, l, true)) == doctest::Approx(8.0));
    CHECK(area(clip_half_plane(sq, l, false)) == doctest::Approx(8.0));
    CHECK(clip_half_plane(sq, Line{{10, 0}, {1, 0}}, true).empty());
}

TEST_CASE("reflection is an involution with determinant -1") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const Line l = Line::through({rng.uniform(0, 100), rng.uniform(0, 100)},
                                     {rng.uniform(100, 200), rng.uniform(0, 100)});
        const Affine2 r = Affine2::reflection(l);
        CHECK(r.det() == doctest::Approx(-1.0));
        const Vec2 p{rng.uniform(-50, 50), rng.uniform(-50, 50)};
        const Vec2 q = r.then(r).apply(p);
        CHECK(q.x == doctest::Approx(p.x));
        CHECK(q.y == doctest::Approx(p.y));
        CHECK(l.side(r.apply(p)) == doctest::Approx(-l.side(p)));
    }
}

TEST_CASE("then composes in application order and inverse undoes") {
    const Affine2 a = Affine2::rotation_about({1, 2}, 0.3);
    const Affine2 b = Affine2::translation({5, -1});
    const Vec2 p{3, 4};
    const Vec2 q = a.then(b).apply(p);
    const Vec2 r = b.apply(a.apply(p));
    CHECK(q.x == doctest::Approx(r.x));
    CHECK(q.y == doctest::Approx(r.y));
    const Vec2 back = a.then(b).inverse().apply(q);
    CHECK(back.x == doctest::Approx(p.x));
    CHECK(back.y == doctest::Approx(p.y));
}

TEST_CASE("segment_inside against point sampling") {
    const Polygon l_shape{{0, 0}, {6, 0}, {6, 2}, {2, 2}, {2, 6}, {0, 6}};
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const Vec2 a{rng.uniform(-1, 7), rng.uniform(-1, 7)}, b{rng.uniform(-1, 7), rng.uniform(-1, 7)};
        const auto in = segment_inside(l_shape, a, b);
        for (int k = 0; k < 50; ++k) {
            const double t = (k + 0.5) / 50.0;
            const Vec2 p = a + t * (b - a);
            if (distance_to_boundary(l_shape, p) < 1e-6) continue;
            bool inside_interval = false;
            for (const auto& iv : in) inside_interval |= (t >= iv.t0 && t <= iv.t1);
            CHECK(inside_interval == contains(l_shape, p));
        }
    }
}

TEST_CASE("interval complement and intersection") {
    const std::vector<Interval> in{{0.2, 0.4}, {0.6, 0.7}};
    const auto out = complement(in);
    REQUIRE(out.size() == 3);
    CHECK(out[0].t0 == 0.0);
    CHECK(out[0].t1 == 0.2);
    CHECK(out[2].t1 == 1.0);
    const auto both = intersect(in, {{0.3, 0.65}});
    REQUIRE(both.size() == 2);
    CHECK(both[0].t0 == 0.3);
    CHECK(both[1].t1 == 0.65);
}

}

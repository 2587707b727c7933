#include <doctest.h>

#include <cmath>

#include "sis/coverage_mask.hpp"
#include "sis/errors.hpp"
#include "sis/metrics.hpp"
#include "sis/random.hpp"

using namespace sis;

namespace {

CoverageMask random_mask(Rng& rng, int w, int h, double p) {
    CoverageMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (rng.bernoulli(p)) m.set(x, y);
    return m;
}

struct Counts {
    long inter = 0, uni = 0, a = 0;
};
Counts count_pixels(const CoverageMask& a, const CoverageMask& b) {
    Counts c;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x) {
            const bool pa = a.test(x, y), pb = b.test(x, y);
            c.inter += pa && pb;
            c.uni += pa || pb;
            c.a += pa;
        }
    return c;
}

EpisodeMetrics episode(std::initializer_list<std::pair<double, double>> steps) {
    EpisodeMetrics e;
    for (auto [n, i] : steps) e.per_step.push_back({n, i, false});
    return e;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("ncov examples") {
    CoverageMask m(100, 90);
    for (int y = 0; y < 45; ++y) m.fill_span(y, 0, 100);
    CHECK(m.popcount() == 4500);
    CHECK(ncov(m, 9000) == 0.5);
    CHECK(ncov(CoverageMask(10, 10), 100) == 0.0);
    CHECK(ncov(m, 4500) == 1.0);
    CHECK_THROWS_AS(ncov(m, 0), InputError);
    CHECK(is_over_covered(ncov(m, 4400)));
}

TEST_CASE("iou examples") {
    CoverageMask a(64, 8), b(64, 8);
    a.fill_span(0, 0, 10);
    b.fill_span(1, 0, 10);
    CHECK(iou(a, a) == 1.0);
    CHECK(iou(a, b) == 0.0);
    CHECK(iou(CoverageMask(5, 5), CoverageMask(5, 5)) == 0.0);
    CHECK_THROWS_AS(iou(a, CoverageMask(65, 8)), InputError);

    // Goal shifted by half its width.
    const Polygon goal{{20, 20}, {120, 20}, {120, 80}, {20, 80}};
    const Polygon shifted{{70, 20}, {170, 20}, {170, 80}, {70, 80}};
    const CoverageMask g = rasterize(std::vector<Polygon>{goal}, 200, 100);
    const CoverageMask s = rasterize(std::vector<Polygon>{shifted}, 200, 100);
    const Counts c = count_pixels(g, s);
    CHECK(iou(g, s) == static_cast<double>(c.inter) / static_cast<double>(c.uni));
    CHECK(iou(g, s) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("iou and ncov equal pixel counts on random masks") {
    Rng rng(8);
    for (int i = 0; i < 30; ++i) {
        const int w = rng.uniform_int(1, 150), h = rng.uniform_int(1, 40);
        const CoverageMask a = random_mask(rng, w, h, rng.uniform()), b = random_mask(rng, w, h, rng.uniform());
        const Counts c = count_pixels(a, b);
        CHECK(iou(a, b) == (c.uni ? static_cast<double>(c.inter) / static_cast<double>(c.uni) : 0.0));
        CHECK(iou(a, b) == iou(b, a));
        CHECK(ncov(a, 1000) == static_cast<double>(c.a) / 1000.0);
    }
}

TEST_CASE("ncov is monotone in added pixels") {
    Rng rng(12);
    CoverageMask m(77, 13);
    double prev = 0.0;
    for (int i = 0; i < 300; ++i) {
        m.set(rng.uniform_int(0, 76), rng.uniform_int(0, 12));
        const double v = ncov(m, 500);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("rasterization covers exactly the pixels whose centers are inside") {
    Rng rng(21);
    for (int i = 0; i < 40; ++i) {
        Polygon poly;
        const int n = rng.uniform_int(3, 8);
        for (int k = 0; k < n; ++k) poly.push_back({rng.uniform(-5, 75), rng.uniform(-5, 45)});
        const CoverageMask m = rasterize(std::vector<Polygon>{poly}, 70, 40);
        for (int y = 0; y < 40; ++y)
            for (int x = 0; x < 70; ++x) {
                const Vec2 c{x + 0.5, y + 0.5};
                if (distance_to_boundary(poly, c) < 1e-9) continue;
                CHECK(m.test(x, y) == contains(poly, c));
            }
    }
}

TEST_CASE("any_within finds pixels by center distance") {
    CoverageMask m(20, 20);
    m.set(10, 10);
    CHECK(m.any_within({10.5, 10.5}, 0.0));
    CHECK(m.any_within({13.5, 10.5}, 3.0));
    CHECK_FALSE(m.any_within({14.5, 10.5}, 3.0));
}

TEST_CASE("success_at conjunction and threshold monotonicity") {
    const auto e = episode({{0.86, 0.84}, {0.9, 0.9}, {0.2, 0.3}});
    CHECK_FALSE(success_at(e, 1, 0.85));
    CHECK(success_at(e, 2, 0.85));
    CHECK(success_at(e, 3, 0.0));
    CHECK(success_at(e, 2, 0.9));
    CHECK_THROWS_AS(success_at(e, 4, 0.85), InputError);
    CHECK_THROWS_AS(success_at(e, 0, 0.85), InputError);
    for (std::size_t s = 1; s <= 3; ++s) {
        bool prev = true;
        for (int t = 0; t <= 100; ++t) {
            const bool ok = success_at(e, s, t / 100.0);
            CHECK((prev || !ok));
            prev = ok;
        }
    }
}

TEST_CASE("mean_ci95 degenerate and constant cases") {
    const auto one = mean_ci95(std::vector<double>{0.7});
    CHECK(one.degenerate);
    CHECK(one.mean == 0.7);
    CHECK(one.ci95 == 0.0);
    const auto same = mean_ci95(std::vector<double>(20, 0.42));
    CHECK(same.mean == doctest::Approx(0.42));
    CHECK(same.ci95 == doctest::Approx(0.0));
    CHECK_FALSE(same.degenerate);
}

TEST_CASE("aggregate matches a two-pass reference") {
    Rng rng(17);
    std::vector<EpisodeMetrics> trials;
    for (int t = 0; t < 20; ++t) {
        EpisodeMetrics e;
        for (int s = 0; s < 5; ++s) e.per_step.push_back({rng.uniform(), rng.uniform(), rng.bernoulli(0.1)});
        trials.push_back(e);
    }
    for (bool incl : {false, true}) {
        const auto agg = aggregate(trials, 0.5, incl);
        REQUIRE(agg.size() == 5);
        for (std::size_t s = 0; s < 5; ++s) {
            std::vector<double> xs;
            int succ = 0;
            for (const auto& e : trials) {
                if (e.per_step[s].excluded && !incl) continue;
                xs.push_back(e.per_step[s].ncov);
                succ += e.per_step[s].ncov >= 0.5 && e.per_step[s].iou >= 0.5;
            }
            double mean = 0;
            for (double x : xs) mean += x;
            mean /= xs.size();
            double ss = 0;
            for (double x : xs) ss += (x - mean) * (x - mean);
            const double ci = 1.96 * std::sqrt(ss / (xs.size() - 1)) / std::sqrt(double(xs.size()));
            CHECK(agg[s].n == xs.size());
            CHECK(agg[s].ncov.mean == doctest::Approx(mean).epsilon(1e-12));
            CHECK(agg[s].ncov.ci95 == doctest::Approx(ci).epsilon(1e-12));
            CHECK(agg[s].ncov.ci95 >= 0.0);
            CHECK(agg[s].success_rate == doctest::Approx(double(succ) / xs.size()));
        }
    }
}

TEST_CASE("metrics CSV round-trip and errors") {
    std::vector<EpisodeMetrics> trials{episode({{0.5, 0.25}, {0.9, 0.875}}), episode({{0.1, 0.2}, {0.3, 0.4}})};
    trials[0].trial_id = "0";
    trials[1].trial_id = "1";
    trials[1].per_step[0].excluded = true;
    const std::string csv = metrics_csv(trials, 0.85);
    CHECK(csv.rfind("trial_id,step,ncov,iou,success@0.85,excluded\n", 0) == 0);
    const auto back = parse_metrics_csv(csv);
    REQUIRE(back.size() == 2);
    CHECK(back[1].per_step[0].excluded);
    CHECK(back[0].per_step[1].iou == 0.875);
    CHECK(metrics_csv(back, 0.85) == csv);

    CHECK_THROWS_AS(parse_metrics_csv("trial_id,step,ncov\n0,1,0.5\n"), DataError);
    try {
        parse_metrics_csv("trial_id,step,ncov,iou\n0,1,0.5,0.5\n0,2,abc,0.5\n");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("aggregate CSV header") {
    const auto agg = aggregate(std::vector<EpisodeMetrics>{episode({{0.5, 0.5}})}, 0.85);
    CHECK(aggregate_csv(agg).rfind("step,mean_ncov,ci95_ncov,mean_iou,ci95_iou,success_rate\n", 0) == 0);
}

}

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "sis/errors.hpp"
#include "sis/garment_sim.hpp"
#include "sis/jsonl.hpp"
#include "sis/metrics.hpp"
#include "sis/random.hpp"
#include "test_support.hpp"

using namespace sis;

namespace {

const GarmentModel& tshirt() {
    static const GarmentModel m = GarmentModel::load(test::data_path("garment_tshirt_v1.json"));
    return m;
}

GarmentState with_folds(std::vector<Fold> folds) { return {std::move(folds), {}, 0}; }

// Left sleeve folded over onto the body along x = 400.
GarmentState sleeve_fold() { return with_folds({{Line{{400, 0}, {-1, 0}}}}); }

Vec2 crossing(CrossingType t, bool left) {
    for (const auto& c : tshirt().crossings())
        if (c.type == t && ((c.point.x < 640) == left)) return c.point;
    FAIL("missing crossing");
    return {};
}

double polyline_length(const Polyline& p) {
    double s = 0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) s += distance(p[i], p[i + 1]);
    return s;
}

}  // namespace

TEST_SUITE("garment-sim") {

TEST_CASE("canonical model") {
    const auto& g = tshirt();
    CHECK(g.width() == 1280);
    CHECK(g.height() == 1024);
    CHECK(g.cov_max() == g.goal_mask().popcount());
    std::map<CrossingType, int> per_type;
    for (const auto& c : g.crossings()) {
        ++per_type[c.type];
        CHECK(distance_to_boundary(g.outline(), c.point) < 1e-9);
        bool mirrored = false;
        for (const auto& d : g.crossings())
            mirrored |= d.type == c.type && d.point == Vec2{1280 - c.point.x, c.point.y};
        CHECK(mirrored);
    }
    for (CrossingType t : kAllCrossingTypes) CHECK(per_type[t] == 2);
    CHECK_THROWS_AS(GarmentModel::from_json("{\"schema_version\":1}"), DataError);
}

TEST_CASE("flat state renders the goal") {
    GarmentSim sim(tshirt(), SimConfig{});
    const auto obs = sim.render(GarmentState::flat());
    CHECK(obs.ncov == 1.0);
    CHECK(obs.iou == 1.0);
    CHECK(obs.visible_crossings.size() == 6);
    // Every face-up seam is fully visible.
    const auto pieces = sim.visible_pieces(GarmentState::flat());
    for (std::size_t si = 0; si < tshirt().seams().size(); ++si) {
        const auto& seam = tshirt().seams()[si];
        double seen = 0;
        for (const auto& p : pieces)
            if (p.seam_index == si) seen += distance(p.a, p.b);
        if (seam.face == SeamFace::back) CHECK(seen == 0.0);
        else CHECK(seen == doctest::Approx(polyline_length(seam.points)));
    }
    // Segments respect the configured maximum length.
    for (const auto& s : obs.visible_segments) CHECK(std::hypot(s.x2 - s.x1, s.y2 - s.y1) <= 150.0 + 2.0);
}

TEST_CASE("vertical center fold halves coverage") {
    GarmentSim sim(tshirt(), SimConfig{});
    const GarmentState s = with_folds({{Line{{640, 0}, {-1, 0}}}});
    const auto obs = sim.render(s);
    const Polygon right = clip_half_plane(tshirt().outline(), Line{{640, 0}, {-1, 0}}, false);
    const auto oracle = rasterize(std::vector<Polygon>{right}, 1280, 1024);
    CHECK(obs.mask == oracle);
    CHECK(obs.ncov == static_cast<double>(oracle.popcount()) / static_cast<double>(tshirt().cov_max()));
    int shoulders = 0;
    for (const auto& c : obs.visible_crossings) shoulders += c.type == CrossingType::shoulder;
    CHECK(shoulders == 1);
}

TEST_CASE("visibility agrees with a point-sampling occlusion oracle") {
    GarmentSim sim(tshirt(), SimConfig{});
    Rng rng(606);
    for (int inst = 0; inst < 5; ++inst) {
        const GarmentState s = sim.randomize(GarmentState::flat(), 1000 + inst);
        const auto layers = fold_layers(tshirt(), s.folds);
        const Affine2 place = placement_transform(tshirt(), s.placement);
        std::vector<Polygon> polys;
        for (const auto& l : layers) polys.push_back(transform(l.region, l.to_plane.then(place)));
        const auto pieces = sim.visible_pieces(s);

        int agree = 0, total = 0;
        const auto& seams = tshirt().seams();
        while (total < 2000) {
            const std::size_t si = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(seams.size()) - 1));
            const auto& pts = seams[si].points;
            const std::size_t e = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(pts.size()) - 2));
            const Vec2 m = pts[e] + rng.uniform() * (pts[e + 1] - pts[e]);
            // Owning layer from the half-plane constraints.
            std::optional<std::size_t> owner;
            bool ambiguous = false;
            for (std::size_t li = 0; li < layers.size(); ++li) {
                bool inside = true;
                for (const Line& c : layers[li].constraints) {
                    const double sd = c.side(m);
                    ambiguous |= std::abs(sd) < 1e-6;
                    inside &= sd <= 0.0;
                }
                if (inside) owner = li;
            }
            if (ambiguous || !owner) continue;
            const Vec2 p = layers[*owner].to_plane.then(place).apply(m);
            bool hidden = false, near_edge = false;
            for (std::size_t lj = *owner + 1; lj < layers.size(); ++lj) {
                hidden |= contains(polys[lj], p);
                near_edge |= distance_to_boundary(polys[lj], p) < 1e-6;
            }
            const auto face = seams[si].face;
            if ((face == SeamFace::front && !layers[*owner].face_up) || (face == SeamFace::back && layers[*owner].face_up))
                hidden = true;
            if (near_edge) continue;
            bool on_piece = false;
            for (const auto& pc : pieces) {
                if (pc.seam_index != si) continue;
                const Vec2 d = pc.b - pc.a;
                const double t = std::clamp(dot(p - pc.a, d) / dot(d, d), 0.0, 1.0);
                on_piece |= distance(pc.a + t * d, p) < 1e-6;
            }
            agree += on_piece == !hidden;
            ++total;
        }
        CHECK(agree >= 0.99 * total);
    }
}

TEST_CASE("adding a fold never increases covered pixels") {
    GarmentSim sim(tshirt(), SimConfig{});
    Rng rng(1234);
    for (int inst = 0; inst < 30; ++inst) {
        std::vector<Fold> folds;
        std::uint64_t prev = sim.render_mask(GarmentState::flat()).popcount();
        for (int f = 0; f < 4; ++f) {
            const double a = rng.uniform(0, std::numbers::pi);
            folds.push_back({Line{{rng.uniform(400, 880), rng.uniform(250, 800)}, {std::cos(a), std::sin(a)}}});
            const std::uint64_t now = sim.render_mask(with_folds(folds)).popcount();
            CHECK(now <= prev);
            prev = now;
        }
    }
}

TEST_CASE("render is a pure function of the state") {
    GarmentSim sim(tshirt(), SimConfig{});
    const GarmentState s = sim.randomize(GarmentState::flat(), 5);
    const auto a = sim.render(s), b = sim.render(s);
    CHECK(a.mask == b.mask);
    CHECK(a.visible_segments == b.visible_segments);
    CHECK(a.visible_crossings == b.visible_crossings);
}

TEST_CASE("randomize: golden state, coverage bound and seed sensitivity") {
    GarmentSim sim(tshirt(), SimConfig{});
    const GarmentState s42 = sim.randomize(GarmentState::flat(), 42);
    const std::string golden = jsonl::read_file(test::test_data_path("randomize_seed42.json"));
    CHECK(state_to_json(s42) + "\n" == golden);
    CHECK(state_from_json(golden) == s42);

    std::set<std::string> digests;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const GarmentState s = sim.randomize(GarmentState::flat(), seed);
        CHECK(sim.render(s).ncov < 0.4);
        CHECK(sim.render(s).ncov > 0.0);
        CHECK(s.folds.size() >= 1);
        CHECK(s.folds.size() <= 4);
        digests.insert(state_digest(s));
        // The whole garment stays on the table.
        for (const auto& poly : sim.layer_polygons(s))
            for (const Vec2& v : poly) {
                CHECK(v.x >= -1e-6);
                CHECK(v.x <= 1280 + 1e-6);
                CHECK(v.y >= -1e-6);
                CHECK(v.y <= 1024 + 1e-6);
            }
    }
    CHECK(digests.size() == 100);
}

TEST_CASE("shoulder fling of the flat garment is a fixed point") {
    GarmentSim sim(tshirt(), SimConfig::noiseless());
    const GarmentState out = sim.grasp_fling(GarmentState::flat(), crossing(CrossingType::shoulder, true),
                                             crossing(CrossingType::shoulder, false), 3);
    CHECK(out.folds.empty());
    const auto obs = sim.render(out);
    CHECK(obs.iou >= 0.95);
    CHECK(obs.ncov == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("grasping the folded flap opens the fold") {
    GarmentSim sim(tshirt(), SimConfig::noiseless());
    const GarmentState s = sleeve_fold();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const GarmentState out = sim.grasp_fling(s, {500, 380}, crossing(CrossingType::shoulder, false), seed);
        CHECK(std::find(out.folds.begin(), out.folds.end(), s.folds[0]) == out.folds.end());
    }
}

TEST_CASE("grasping off the garment is a miss") {
    GarmentSim sim(tshirt(), SimConfig{});
    CHECK_THROWS_AS(sim.grasp_fling(GarmentState::flat(), {5, 5}, {640, 500}, 1), GraspMiss);
    // Within the gripper tolerance of the edge still counts.
    CHECK_NOTHROW(sim.grasp_fling(GarmentState::flat(), {430 - 5, 600}, {640, 500}, 1));
}

TEST_CASE("folds away from the grasp shake out at the configured rate") {
    GarmentSim sim(tshirt(), SimConfig{});
    const GarmentState s = sleeve_fold();
    int opened = 0;
    const int n = 400;
    for (std::uint64_t seed = 0; seed < n; ++seed) {
        const GarmentState out = sim.grasp_fling(s, crossing(CrossingType::shoulder, true),
                                                 crossing(CrossingType::shoulder, false), seed);
        opened += std::find(out.folds.begin(), out.folds.end(), s.folds[0]) == out.folds.end();
    }
    // 0.3 +- 4.5 sd
    CHECK(opened > n * 0.3 - 4.5 * std::sqrt(n * 0.21));
    CHECK(opened < n * 0.3 + 4.5 * std::sqrt(n * 0.21));

    SimConfig never;
    never.shake_out_probability = 0.0;
    GarmentSim stiff(tshirt(), never);
    const GarmentState kept = stiff.grasp_fling(s, crossing(CrossingType::shoulder, true),
                                                crossing(CrossingType::shoulder, false), 5);
    CHECK(kept.folds.front() == s.folds[0]);
}

TEST_CASE("fling never makes the garment vanish") {
    GarmentSim sim(tshirt(), SimConfig{});
    Rng rng(77);
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        GarmentState s = sim.randomize(GarmentState::flat(), seed);
        for (int step = 0; step < 3; ++step) {
            const auto obs = sim.render(s);
            std::vector<Vec2> on;
            for (int y = 0; y < 1024; y += 7)
                for (int x = 0; x < 1280; x += 7)
                    if (obs.mask.test(x, y)) on.push_back({x + 0.5, y + 0.5});
            REQUIRE(on.size() >= 2);
            const Vec2 a = on[static_cast<std::size_t>(rng.uniform_int(0, int(on.size()) - 1))];
            const Vec2 b = on[static_cast<std::size_t>(rng.uniform_int(0, int(on.size()) - 1))];
            s = sim.grasp_fling(s, a, b, derive_seed(seed, {std::uint64_t(step)}));
            CHECK(sim.render(s).ncov >= 0.05);
            CHECK(sim.render(s).ncov <= kMaxPlausibleNcov);
            CHECK(s.folds.size() <= 4);
        }
    }
}

TEST_CASE("noiseless detector recovers the visible crossings") {
    GarmentSim sim(tshirt(), SimConfig::noiseless());
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto obs = sim.render(sim.randomize(GarmentState::flat(), seed));
        const auto det = sim.detector_surrogate(obs, seed);
        FusionConfig wide;
        wide.max_per_type = {6, 6, 6};
        wide.dedup_radius = 0;
        auto fused = merge(det.scd1, det.scd2, wide);
        auto expected = merge(obs.visible_crossings, {}, wide);
        REQUIRE(fused.size() == expected.size());
        for (std::size_t i = 0; i < fused.size(); ++i) {
            CHECK(fused[i].type == expected[i].type);
            CHECK(fused[i].point() == expected[i].point());
        }
        CHECK(det.seam_boxes.size() <= obs.visible_segments.size());
    }
}

TEST_CASE("a silent first detector leaves only the second") {
    SimConfig cfg;
    cfg.recall_scd1 = 0.0;
    GarmentSim sim(tshirt(), cfg);
    const auto obs = sim.render(GarmentState::flat());
    const auto det = sim.detector_surrogate(obs, 9);
    CHECK(det.scd1.empty());
    FusionConfig fc;
    CHECK(merge(det.scd1, det.scd2, fc) == merge({}, det.scd2, fc));
}

TEST_CASE("fusing both detectors raises recall") {
    GarmentSim sim(tshirt(), SimConfig{});
    FusionConfig fc;
    int visible = 0, hit_single = 0, hit_fused = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto obs = sim.render(sim.randomize(GarmentState::flat(), seed));
        const auto det = sim.detector_surrogate(obs, seed);
        const auto fused = merge(det.scd1, det.scd2, fc);
        for (const auto& c : obs.visible_crossings) {
            auto found = [&](const std::vector<CrossingDetection>& list) {
                for (const auto& d : list)
                    if (d.type == c.type && distance(d.point(), c.point()) <= fc.dedup_radius) return true;
                return false;
            };
            ++visible;
            hit_single += found(det.scd1);
            hit_fused += found(fused);
        }
    }
    REQUIRE(visible > 0);
    CHECK(hit_fused >= hit_single);
    MESSAGE("single-source recall " << double(hit_single) / visible << ", fused " << double(hit_fused) / visible);
}

TEST_CASE("state JSON round-trip") {
    GarmentSim sim(tshirt(), SimConfig{});
    const GarmentState s = sim.randomize(GarmentState::flat(), 8);
    CHECK(state_from_json(state_to_json(s)) == s);
    CHECK(state_digest(s).size() == 16);
    CHECK_THROWS_AS(state_from_json("{"), DataError);
}

}

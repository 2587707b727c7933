#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <tuple>

#include "sis/detection_fusion.hpp"
#include "sis/errors.hpp"
#include "sis/random.hpp"

using namespace sis;

namespace {

CrossingDetection det(CrossingType c, double x, double y, double conf, DetectionSource s = DetectionSource::scd1) {
    return {c, x, y, conf, s};
}

// Selection-based reference: per type, repeatedly take the best remaining detection and
// discard everything of that type within the radius.
std::vector<CrossingDetection> reference_merge(std::vector<CrossingDetection> pool, const FusionConfig& cfg) {
    std::vector<CrossingDetection> out;
    for (CrossingType t : kAllCrossingTypes) {
        std::vector<CrossingDetection> rest;
        for (const auto& d : pool)
            if (d.type == t) rest.push_back(d);
        int kept = 0;
        while (!rest.empty() && kept < cfg.cap(t)) {
            auto best = rest.begin();
            for (auto it = rest.begin(); it != rest.end(); ++it) {
                const auto key = [](const CrossingDetection& d) {
                    return std::tuple{-d.confidence, d.x, d.y, static_cast<int>(d.source)};
                };
                if (key(*it) < key(*best)) best = it;
            }
            const CrossingDetection chosen = *best;
            out.push_back(chosen);
            ++kept;
            std::erase_if(rest, [&](const CrossingDetection& d) { return distance(d.point(), chosen.point()) <= cfg.dedup_radius; });
        }
    }
    return out;
}

std::vector<CrossingDetection> random_list(Rng& rng, int n, DetectionSource src) {
    std::vector<CrossingDetection> v;
    for (int i = 0; i < n; ++i) {
        // Coarse grids force coordinate and confidence ties.
        v.push_back(det(crossing_type_from_int(rng.uniform_int(1, 3)), 5.0 * rng.uniform_int(0, 12),
                        5.0 * rng.uniform_int(0, 12), 0.1 * rng.uniform_int(0, 10), src));
    }
    return v;
}

}  // namespace

TEST_SUITE("detection-fusion") {

TEST_CASE("near-duplicate keeps the higher confidence") {
    FusionConfig cfg;
    cfg.dedup_radius = 10;
    const auto out = merge({det(CrossingType::shoulder, 100, 100, 0.9)},
                           {det(CrossingType::shoulder, 102, 101, 0.8, DetectionSource::scd2)}, cfg);
    REQUIRE(out.size() == 1);
    CHECK(out[0] == det(CrossingType::shoulder, 100, 100, 0.9));
}

TEST_CASE("union with an empty list") {
    const auto d = det(CrossingType::neck_point, 50, 50, 0.7, DetectionSource::scd2);
    const auto out = merge({}, {d}, {});
    REQUIRE(out.size() == 1);
    CHECK(out[0] == d);
    CHECK(merge({}, {}, {}).empty());
}

TEST_CASE("cap keeps the most confident") {
    FusionConfig cfg;
    const auto out = merge({det(CrossingType::shoulder, 0, 0, 0.7), det(CrossingType::shoulder, 100, 0, 0.9),
                            det(CrossingType::shoulder, 200, 0, 0.8)},
                           {}, cfg);
    REQUIRE(out.size() == 2);
    CHECK(out[0].confidence == 0.9);
    CHECK(out[1].confidence == 0.8);
}

TEST_CASE("output ordered by type then confidence") {
    const auto out = merge({det(CrossingType::neck_point, 0, 0, 0.9), det(CrossingType::shoulder, 100, 0, 0.5)},
                           {det(CrossingType::shoulder, 300, 0, 0.6, DetectionSource::scd2)}, {});
    REQUIRE(out.size() == 3);
    CHECK(out[0].type == CrossingType::shoulder);
    CHECK(out[0].confidence == 0.6);
    CHECK(out[2].type == CrossingType::neck_point);
}

TEST_CASE("invalid inputs raise InputError") {
    FusionConfig cfg;
    cfg.max_per_type[1] = 0;
    CHECK_THROWS_AS(merge({}, {}, cfg), InputError);
    CHECK_THROWS_AS(merge({det(CrossingType::shoulder, 0, 0, 1.5)}, {}, {}), InputError);
}

TEST_CASE("permutation oracle: every input order yields the reference result") {
    Rng rng(2024);
    for (int inst = 0; inst < 60; ++inst) {
        FusionConfig cfg;
        cfg.dedup_radius = 5.0 * rng.uniform_int(0, 4);
        cfg.max_per_type = {rng.uniform_int(1, 3), rng.uniform_int(1, 3), rng.uniform_int(1, 3)};
        auto a = random_list(rng, rng.uniform_int(0, 3), DetectionSource::scd1);
        auto b = random_list(rng, rng.uniform_int(0, 3), DetectionSource::scd2);
        std::vector<CrossingDetection> all = a;
        all.insert(all.end(), b.begin(), b.end());
        const auto expected = reference_merge(all, cfg);
        const auto got = merge(a, b, cfg);
        CHECK(got == expected);

        std::vector<int> idx(all.size());
        std::iota(idx.begin(), idx.end(), 0);
        do {
            std::vector<CrossingDetection> p1, p2;
            for (int i : idx) (all[i].source == DetectionSource::scd1 ? p1 : p2).push_back(all[i]);
            CHECK(merge(p1, p2, cfg) == expected);
            CHECK(merge(p2, p1, cfg) == expected);
        } while (std::next_permutation(idx.begin(), idx.end()));
    }
}

TEST_CASE("detection records round-trip") {
    DetectionRecord r{"img", {det(CrossingType::bottom_hem, 1.5, 2, 0.25, DetectionSource::scd2)}};
    const auto line = detection_to_json_line(r);
    const auto back = detection_from_json_line(line);
    CHECK(back.image_id == "img");
    CHECK(back.detections == r.detections);
    CHECK(detection_to_json_line(back) == line);
}

}

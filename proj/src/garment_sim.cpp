#include "sis/garment_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "sis/errors.hpp"
#include "sis/jsonl.hpp"
#include "sis/metrics.hpp"
#include "sis/random.hpp"

namespace sis {

SimConfig SimConfig::noiseless() {
    SimConfig c;
    c.rotation_noise_deg = 0.0;
    c.translation_noise_px = 0.0;
    c.detection_jitter_px = 0.0;
    c.recall_scd1 = 1.0;
    c.recall_scd2 = 1.0;
    c.confidence_noise = 0.0;
    return c;
}

namespace {

constexpr double kMinPieceArea = 1.0;
constexpr double kConstraintEps = 1e-6;
constexpr double kCoverEps = 0.5;

// The same line expressed in material coordinates of a layer mapped by `to_plane`.
Line to_material(const Line& plane_line, const Affine2& to_plane) {
    Affine2 inv = to_plane.inverse();
    Vec2 n{inv.a * plane_line.normal.x + inv.b * plane_line.normal.y,
           inv.c * plane_line.normal.x + inv.d * plane_line.normal.y};
    return {inv.apply(plane_line.origin), n};
}

double max_violation(const Layer& layer, Vec2 m) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const Line& c : layer.constraints) worst = std::max(worst, c.side(m));
    return layer.constraints.empty() ? -1.0 : worst;
}

// Topmost layer holding material point m; falls back to the least-violating layer.
std::size_t layer_of_material(const std::vector<Layer>& layers, Vec2 m) {
    std::size_t best = 0;
    double best_violation = std::numeric_limits<double>::infinity();
    for (std::size_t i = layers.size(); i-- > 0;) {
        double v = max_violation(layers[i], m);
        if (v <= kConstraintEps) return i;
        if (v < best_violation) {
            best_violation = v;
            best = i;
        }
    }
    return best;
}

bool layer_holds(const Layer& layer, Vec2 m) { return max_violation(layer, m) <= kConstraintEps; }

// Parameter interval of a→b satisfying every constraint (side <= 0); convex, so one interval.
bool clip_to_constraints(const std::vector<Line>& constraints, Vec2 a, Vec2 b, double& t0, double& t1) {
    t0 = 0.0;
    t1 = 1.0;
    for (const Line& c : constraints) {
        double sa = c.side(a), sb = c.side(b);
        if (sa > 0.0 && sb > 0.0) return false;
        if (sa <= 0.0 && sb <= 0.0) continue;
        double t = sa / (sa - sb);
        if (sa > 0.0)
            t0 = std::max(t0, t);
        else
            t1 = std::min(t1, t);
    }
    return t1 > t0;
}

struct SideStats {
    double area = 0.0;
    double reach = 0.0;  // farthest vertex distance from the line
};

SideStats side_stats(const std::vector<Polygon>& polys, const Line& line, bool positive) {
    SideStats s;
    for (const auto& p : polys) {
        Polygon part = clip_half_plane(p, line, positive);
        if (part.empty()) continue;
        s.area += area(part);
        for (Vec2 v : part) s.reach = std::max(s.reach, std::abs(line.side(v)));
    }
    return s;
}

std::vector<Polygon> plane_polygons(const std::vector<Layer>& layers) {
    std::vector<Polygon> out;
    out.reserve(layers.size());
    for (const auto& l : layers) out.push_back(transform(l.region, l.to_plane));
    return out;
}

Vec2 area_centroid(const std::vector<Polygon>& polys) {
    double total = 0.0;
    Vec2 acc{};
    for (const auto& p : polys) {
        double a = area(p);
        if (a <= 0.0) continue;
        acc = acc + a * centroid(p);
        total += a;
    }
    return total > 0.0 ? (1.0 / total) * acc : acc;
}

BBox union_bounds(const std::vector<Polygon>& polys) {
    BBox bb{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& p : polys) {
        BBox b = bounds(p);
        bb.min_x = std::min(bb.min_x, b.min_x);
        bb.min_y = std::min(bb.min_y, b.min_y);
        bb.max_x = std::max(bb.max_x, b.max_x);
        bb.max_y = std::max(bb.max_y, b.max_y);
    }
    return bb;
}

double shift_into(double lo, double hi, double limit) {
    if (hi - lo > limit) return limit / 2.0 - (lo + hi) / 2.0;
    if (lo < 0.0) return -lo;
    if (hi > limit) return limit - hi;
    return 0.0;
}

}  // namespace

std::vector<Layer> fold_layers(const GarmentModel& g, const std::vector<Fold>& folds) {
    std::vector<Layer> layers{Layer{g.outline(), {}, Affine2::identity(), true, 0}};
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const Line& line = folds[f].line;
        const Affine2 reflect = Affine2::reflection(line);
        std::vector<Layer> stationary, moving;
        for (const Layer& layer : layers) {
            const Polygon plane = transform(layer.region, layer.to_plane);
            const Affine2 inv = layer.to_plane.inverse();
            const Line mat_line = to_material(line, layer.to_plane);

            Polygon stay = clip_half_plane(plane, line, false);
            if (!stay.empty() && area(stay) >= kMinPieceArea) {
                Layer s = layer;
                s.region = transform(stay, inv);
                s.constraints.push_back(mat_line);
                stationary.push_back(std::move(s));
            }
            Polygon move = clip_half_plane(plane, line, true);
            if (!move.empty() && area(move) >= kMinPieceArea) {
                Layer m = layer;
                m.region = transform(move, inv);
                m.constraints.push_back({mat_line.origin, {-mat_line.normal.x, -mat_line.normal.y}});
                m.to_plane = layer.to_plane.then(reflect);
                m.face_up = !layer.face_up;
                m.moved_by |= (1u << f);
                moving.push_back(std::move(m));
            }
        }
        layers = std::move(stationary);
        layers.insert(layers.end(), moving.rbegin(), moving.rend());
    }
    return layers;
}

Affine2 placement_transform(const GarmentModel& g, const Placement& p) {
    return Affine2::rotation_about(g.center(), p.theta).then(Affine2::translation(p.offset));
}

GarmentSim::GarmentSim(GarmentModel model, SimConfig cfg) : model_(std::move(model)), cfg_(cfg) {
    if (cfg_.max_folds < 0 || cfg_.max_folds > 31) throw InputError("max_folds must be in 0..31");
}

std::vector<Polygon> GarmentSim::layer_polygons(const GarmentState& s) const {
    const Affine2 place = placement_transform(model_, s.placement);
    std::vector<Polygon> out;
    for (const Layer& l : fold_layers(model_, s.folds)) out.push_back(transform(l.region, l.to_plane.then(place)));
    return out;
}

CoverageMask GarmentSim::render_mask(const GarmentState& s) const {
    return rasterize(layer_polygons(s), model_.width(), model_.height());
}

std::vector<VisiblePiece> GarmentSim::visible_pieces(const GarmentState& s) const {
    const auto layers = fold_layers(model_, s.folds);
    const Affine2 place = placement_transform(model_, s.placement);
    std::vector<Polygon> polys;
    for (const Layer& l : layers) polys.push_back(transform(l.region, l.to_plane.then(place)));

    std::vector<VisiblePiece> out;
    const auto& seams = model_.seams();
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const Layer& layer = layers[li];
        const Affine2 to_table = layer.to_plane.then(place);
        for (std::size_t si = 0; si < seams.size(); ++si) {
            const CanonicalSeam& seam = seams[si];
            if (seam.face == SeamFace::front && !layer.face_up) continue;
            if (seam.face == SeamFace::back && layer.face_up) continue;
            for (std::size_t e = 0; e + 1 < seam.points.size(); ++e) {
                Vec2 a = seam.points[e], b = seam.points[e + 1];
                double t0, t1;
                if (!clip_to_constraints(layer.constraints, a, b, t0, t1)) continue;
                Vec2 A = to_table.apply(a), B = to_table.apply(b);
                std::vector<Interval> vis{{t0, t1}};
                for (std::size_t lj = li + 1; lj < layers.size() && !vis.empty(); ++lj)
                    vis = intersect(vis, complement(segment_inside(polys[lj], A, B)));
                for (const Interval& iv : vis) {
                    Vec2 pa = A + iv.t0 * (B - A), pb = A + iv.t1 * (B - A);
                    if (distance(pa, pb) >= cfg_.min_visible_px) out.push_back({si, li, pa, pb});
                }
            }
        }
    }
    return out;
}

GarmentObservation GarmentSim::render(const GarmentState& s) const {
    const auto layers = fold_layers(model_, s.folds);
    const Affine2 place = placement_transform(model_, s.placement);
    std::vector<Polygon> polys;
    for (const Layer& l : layers) polys.push_back(transform(l.region, l.to_plane.then(place)));

    GarmentObservation obs;
    obs.mask = rasterize(polys, model_.width(), model_.height());
    obs.ncov = ncov(obs.mask, model_.cov_max());
    obs.iou = iou(obs.mask, model_.goal_mask());

    const double wmax = model_.width() - 1.0, hmax = model_.height() - 1.0;
    auto clamp_px = [&](Vec2 p) {
        return Vec2{std::clamp(std::round(p.x), 0.0, wmax), std::clamp(std::round(p.y), 0.0, hmax)};
    };

    for (const VisiblePiece& piece : visible_pieces(s)) {
        const SeamCategory cat = model_.seams()[piece.seam_index].category;
        const double len = distance(piece.a, piece.b);
        const int chunks = std::max(1, static_cast<int>(std::ceil(len / cfg_.max_segment_px)));
        for (int c = 0; c < chunks; ++c) {
            Vec2 p = clamp_px(piece.a + (static_cast<double>(c) / chunks) * (piece.b - piece.a));
            Vec2 q = clamp_px(piece.a + (static_cast<double>(c + 1) / chunks) * (piece.b - piece.a));
            if (p == q) continue;
            obs.visible_segments.push_back({cat, p.x, p.y, q.x, q.y});
        }
    }

    const auto& crossings = model_.crossings();
    for (std::size_t ci = 0; ci < crossings.size(); ++ci) {
        const Vec2 m = crossings[ci].point;
        std::size_t li = layers.size();
        for (std::size_t i = layers.size(); i-- > 0;)
            if (layer_holds(layers[i], m)) {
                li = i;
                break;
            }
        if (li == layers.size()) continue;
        const Vec2 X = layers[li].to_plane.then(place).apply(m);
        bool covered = false;
        for (std::size_t lj = li + 1; lj < layers.size() && !covered; ++lj)
            covered = contains(polys[lj], X) || distance_to_boundary(polys[lj], X) <= kCoverEps;
        if (covered) continue;
        const Vec2 px{std::clamp(X.x, 0.0, wmax), std::clamp(X.y, 0.0, hmax)};
        const double conf = 1.0 - cfg_.confidence_noise * hash_unit(s.rng_seed, ci);
        obs.visible_crossings.push_back({crossings[ci].type, px.x, px.y, conf, DetectionSource::scd1});
    }
    return obs;
}

Placement GarmentSim::fit_in_frame(const std::vector<Layer>& layers, Placement p) const {
    const Affine2 place = placement_transform(model_, p);
    std::vector<Polygon> polys;
    for (const Layer& l : layers) polys.push_back(transform(l.region, l.to_plane.then(place)));
    const BBox bb = union_bounds(polys);
    p.offset.x += shift_into(bb.min_x, bb.max_x, model_.width());
    p.offset.y += shift_into(bb.min_y, bb.max_y, model_.height());
    return p;
}

GarmentState GarmentSim::randomize(const GarmentState& /*previous*/, std::uint64_t seed) const {
    Rng rng(seed);
    const double two_pi = 2.0 * std::numbers::pi;
    for (int attempt = 0; attempt < 10000; ++attempt) {
        const int n_folds = cfg_.max_folds > 0 ? rng.uniform_int(1, cfg_.max_folds) : 0;
        std::vector<Fold> folds;
        for (int tries = 0; static_cast<int>(folds.size()) < n_folds && tries < 200; ++tries) {
            const auto polys = plane_polygons(fold_layers(model_, folds));
            const BBox bb = union_bounds(polys);
            Vec2 pt{};
            bool found = false;
            for (int k = 0; k < 100 && !found; ++k) {
                pt = {rng.uniform(bb.min_x, bb.max_x), rng.uniform(bb.min_y, bb.max_y)};
                found = std::any_of(polys.begin(), polys.end(), [&](const Polygon& p) { return contains(p, pt); });
            }
            if (!found) continue;
            const double angle = rng.uniform(0.0, std::numbers::pi);
            Line line{pt, {-std::sin(angle), std::cos(angle)}};
            const SideStats pos = side_stats(polys, line, true), neg = side_stats(polys, line, false);
            const double total = pos.area + neg.area;
            if (std::min(pos.area, neg.area) < cfg_.min_fold_fraction * total) continue;
            if (pos.area > neg.area) line.normal = {-line.normal.x, -line.normal.y};
            folds.push_back({line});
        }
        GarmentState state{folds, {rng.uniform(-std::numbers::pi, std::numbers::pi), {}}, 0};
        const auto layers = fold_layers(model_, state.folds);
        {
            const Affine2 place = placement_transform(model_, state.placement);
            std::vector<Polygon> polys;
            for (const Layer& l : layers) polys.push_back(transform(l.region, l.to_plane.then(place)));
            const BBox bb = union_bounds(polys);
            auto pick = [&](double lo, double hi, double limit) {
                if (hi - lo > limit) return limit / 2.0 - (lo + hi) / 2.0;
                return rng.uniform(-lo, limit - hi);
            };
            state.placement.offset = {pick(bb.min_x, bb.max_x, model_.width()),
                                      pick(bb.min_y, bb.max_y, model_.height())};
        }
        state.placement = fit_in_frame(layers, state.placement);
        state.placement.theta = std::remainder(state.placement.theta, two_pi);
        state.rng_seed = derive_seed(seed, {static_cast<std::uint64_t>(attempt), 0x7a11});
        if (ncov(render_mask(state), model_.cov_max()) < cfg_.randomize_ncov_below) return state;
    }
    throw InputError("randomize: could not reach the target coverage");
}

bool GarmentSim::locate(const std::vector<Layer>& layers, const Affine2& place, Vec2 p, Grasped& out) const {
    for (std::size_t i = layers.size(); i-- > 0;) {
        const Affine2 to_table = layers[i].to_plane.then(place);
        const Polygon poly = transform(layers[i].region, to_table);
        if (contains(poly, p) || distance_to_boundary(poly, p) <= cfg_.grasp_tolerance_px) {
            out = {i, to_table.inverse().apply(p)};
            return true;
        }
    }
    return false;
}

GarmentState GarmentSim::grasp_fling(const GarmentState& s, Vec2 p_left, Vec2 p_right, std::uint64_t seed) const {
    const auto layers = fold_layers(model_, s.folds);
    const Affine2 place = placement_transform(model_, s.placement);
    const CoverageMask mask = render_mask(s);
    Grasped gl{}, gr{};
    for (auto [p, g] : {std::pair{p_left, &gl}, std::pair{p_right, &gr}}) {
        if (!mask.any_within(p, cfg_.grasp_tolerance_px) || !locate(layers, place, p, *g))
            throw GraspMiss(fmt::format("grasp point ({:.1f}, {:.1f}) is off the garment", p.x, p.y));
    }

    Rng rng(seed);

    // Folds that carried a grasped point are pulled open; any other fold shakes out with
    // a fixed probability. Survivors persist in order.
    const std::uint32_t resolved = layers[gl.layer].moved_by | layers[gr.layer].moved_by;
    std::vector<Fold> folds;
    for (std::size_t f = 0; f < s.folds.size(); ++f) {
        const bool shaken = rng.uniform() < cfg_.shake_out_probability;
        if (!(resolved & (1u << f)) && !shaken) folds.push_back(s.folds[f]);
    }

    auto plane_of = [&](const std::vector<Layer>& ls, Vec2 m) { return ls[layer_of_material(ls, m)].to_plane.apply(m); };
    auto unfolded = fold_layers(model_, folds);
    const Vec2 ql = plane_of(unfolded, gl.material), qr = plane_of(unfolded, gr.material);

    const double rot_noise = rng.normal(0.0, cfg_.rotation_noise_deg * std::numbers::pi / 180.0);
    const Vec2 shift_noise{rng.normal(0.0, cfg_.translation_noise_px), rng.normal(0.0, cfg_.translation_noise_px)};

    double phi = s.placement.theta;
    const Vec2 mid = 0.5 * (ql + qr);
    if (distance(ql, qr) >= 1.0) {
        // Material hanging beyond the grasp line on the lighter side lands folded over it.
        Line grasp_line = Line::through(ql, qr);
        const auto polys = plane_polygons(unfolded);
        const SideStats pos = side_stats(polys, grasp_line, true), neg = side_stats(polys, grasp_line, false);
        const bool pos_lighter = pos.area < neg.area;
        const SideStats& light = pos_lighter ? pos : neg;
        if (light.area > 0.0 && light.reach > cfg_.flop_min_overhang_px &&
            static_cast<int>(folds.size()) < cfg_.max_folds) {
            if (!pos_lighter) grasp_line.normal = {-grasp_line.normal.x, -grasp_line.normal.y};
            folds.push_back({grasp_line});
            unfolded = fold_layers(model_, folds);
        }
        // Grasp line horizontal, the garment hanging below it.
        const Vec2 d = qr - ql;
        phi = -std::atan2(d.y, d.x);
        const Vec2 v = area_centroid(plane_polygons(unfolded)) - ql;
        if (std::sin(phi) * v.x + std::cos(phi) * v.y < 0.0) phi += std::numbers::pi;
    }
    phi = std::remainder(phi + rot_noise, 2.0 * std::numbers::pi);

    const Vec2 c = model_.center();
    const Affine2 rot = Affine2::rotation_about({0.0, 0.0}, phi);
    Placement placement{phi, cfg_.drop_point + shift_noise - c - rot.apply(mid - c)};
    placement = fit_in_frame(unfolded, placement);
    return {std::move(folds), placement, derive_seed(seed, {0xf11e})};
}

GarmentSim::DetectorOutput GarmentSim::detector_surrogate(const GarmentObservation& obs, std::uint64_t seed) const {
    DetectorOutput out;
    const CodecConfig codec{cfg_.lambda_thres, model_.width(), model_.height()};
    for (const auto& seg : obs.visible_segments) {
        if (seg.x1 == seg.x2 && seg.y1 == seg.y2) continue;
        if (auto box = encode(seg, codec)) out.seam_boxes.push_back(*box);
    }
    Rng rng(seed);
    const double wmax = model_.width() - 1.0, hmax = model_.height() - 1.0;
    for (auto [source, recall, list] : {std::tuple{DetectionSource::scd1, cfg_.recall_scd1, &out.scd1},
                                        std::tuple{DetectionSource::scd2, cfg_.recall_scd2, &out.scd2}}) {
        for (const auto& c : obs.visible_crossings) {
            // Draw every variate so dropout settings do not shift the rest of the stream.
            const double keep = rng.uniform();
            const double jx = rng.normal(0.0, cfg_.detection_jitter_px);
            const double jy = rng.normal(0.0, cfg_.detection_jitter_px);
            const double dc = rng.uniform();
            if (!(keep < recall)) continue;
            CrossingDetection d = c;
            d.x = std::clamp(c.x + jx, 0.0, wmax);
            d.y = std::clamp(c.y + jy, 0.0, hmax);
            d.confidence = std::clamp(c.confidence - 0.5 * cfg_.confidence_noise * dc, 0.0, 1.0);
            d.source = source;
            list->push_back(d);
        }
    }
    return out;
}

// Serialization ----------------------------------------------------------------

std::string state_to_json(const GarmentState& s) {
    jsonl::Json j;
    jsonl::Json folds = jsonl::Json::array();
    for (const Fold& f : s.folds)
        folds.push_back({{"origin", {f.line.origin.x, f.line.origin.y}}, {"normal", {f.line.normal.x, f.line.normal.y}}});
    j["folds"] = std::move(folds);
    j["placement"] = {{"theta", s.placement.theta}, {"offset", {s.placement.offset.x, s.placement.offset.y}}};
    j["rng_seed"] = s.rng_seed;
    return j.dump();
}

GarmentState state_from_json(const std::string& text) {
    jsonl::Json j;
    try {
        j = jsonl::Json::parse(text);
    } catch (const jsonl::Json::parse_error& e) {
        throw DataError(fmt::format("malformed state JSON: {}", e.what()));
    }
    auto vec = [](const jsonl::Json& a) {
        if (!a.is_array() || a.size() != 2) throw DataError("expected [x, y]");
        return Vec2{a[0].get<double>(), a[1].get<double>()};
    };
    GarmentState s;
    for (const auto& f : jsonl::get_array(j, "folds")) s.folds.push_back({{vec(f.at("origin")), vec(f.at("normal"))}});
    const auto& p = j.at("placement");
    s.placement = {jsonl::get_number(p, "theta"), vec(p.at("offset"))};
    s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    return s;
}

std::string state_digest(const GarmentState& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : state_to_json(s)) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return fmt::format("{:016x}", h);
}

}  // namespace sis

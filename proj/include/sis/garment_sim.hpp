#pragma once

// Deterministic fold-stack garment simulator.
//
// A configuration is an ordered stack of folds applied to the canonical flat garment,
// followed by a rigid placement on the table. Each fold reflects the part of the current
// configuration on the positive side of its line onto the other side and lays it on top.
// Layers therefore carry the material region they hold, the isometry taking material to
// the folded plane, their face orientation and the set of folds that moved them.

#include <cstdint>
#include <string>
#include <vector>

#include "sis/coverage_mask.hpp"
#include "sis/detection_fusion.hpp"
#include "sis/garment_model.hpp"
#include "sis/geometry.hpp"
#include "sis/seam_codec.hpp"

namespace sis {

struct Fold {
    Line line;  // in the folded-plane frame; the positive side moves

    friend bool operator==(const Fold&, const Fold&) = default;
};

// table = R(theta) (plane - c) + c + offset, with c the canonical frame center.
struct Placement {
    double theta = 0.0;
    Vec2 offset{};

    friend bool operator==(const Placement&, const Placement&) = default;
};

struct GarmentState {
    std::vector<Fold> folds;
    Placement placement;
    std::uint64_t rng_seed = 0;

    static GarmentState flat(std::uint64_t seed = 0) { return {{}, {}, seed}; }
    friend bool operator==(const GarmentState&, const GarmentState&) = default;
};

struct SimConfig {
    int max_folds = 4;
    double rotation_noise_deg = 1.5;
    double translation_noise_px = 5.0;
    double detection_jitter_px = 3.0;
    double recall_scd1 = 0.9;
    double recall_scd2 = 0.9;
    double confidence_noise = 0.1;
    double grasp_tolerance_px = 8.0;
    // Material hanging above the grasp line by more than this lands folded over.
    double flop_min_overhang_px = 60.0;
    // Chance that a fold not holding a grasped point still opens during the fling.
    double shake_out_probability = 0.3;
    Vec2 drop_point{640.0, 200.0};
    double max_segment_px = 150.0;
    double min_visible_px = 8.0;
    double lambda_thres = 10.0;
    double randomize_ncov_below = 0.4;
    double min_fold_fraction = 0.03;

    static SimConfig noiseless();
};

struct Layer {
    Polygon region;                 // material coordinates (may contain zero-width bridges)
    std::vector<Line> constraints;  // material half-planes (side <= 0) whose intersection with the outline is region
    Affine2 to_plane;               // material -> folded plane
    bool face_up = true;
    std::uint32_t moved_by = 0;     // bit f set if fold f reflected this layer
};

// Layers bottom to top for the given fold stack.
std::vector<Layer> fold_layers(const GarmentModel& g, const std::vector<Fold>& folds);

Affine2 placement_transform(const GarmentModel& g, const Placement& p);

struct VisiblePiece {
    std::size_t seam_index;
    std::size_t layer_index;
    Vec2 a, b;  // table frame
};

struct GarmentObservation {
    std::vector<SeamLineSegment> visible_segments;
    std::vector<CrossingDetection> visible_crossings;
    CoverageMask mask;
    double ncov = 0.0;
    double iou = 0.0;  // against the canonical goal mask
};

class GarmentSim {
public:
    GarmentSim(GarmentModel model, SimConfig cfg);

    const GarmentModel& model() const { return model_; }
    const SimConfig& config() const { return cfg_; }

    // Table-frame polygons of every layer, bottom to top.
    std::vector<Polygon> layer_polygons(const GarmentState& s) const;
    CoverageMask render_mask(const GarmentState& s) const;
    // Unrounded visible seam pieces in the table frame.
    std::vector<VisiblePiece> visible_pieces(const GarmentState& s) const;
    GarmentObservation render(const GarmentState& s) const;

    // Re-draws 1..max_folds random folds and a random placement until ncov < randomize_ncov_below.
    GarmentState randomize(const GarmentState& s, std::uint64_t seed) const;

    // Throws GraspMiss when a point is off the garment mask.
    GarmentState grasp_fling(const GarmentState& s, Vec2 p_left, Vec2 p_right, std::uint64_t seed) const;

    struct DetectorOutput {
        std::vector<OrientedSeamBox> seam_boxes;
        std::vector<CrossingDetection> scd1;
        std::vector<CrossingDetection> scd2;
    };
    DetectorOutput detector_surrogate(const GarmentObservation& obs, std::uint64_t seed) const;

private:
    struct Grasped {
        std::size_t layer;
        Vec2 material;
    };
    bool locate(const std::vector<Layer>& layers, const Affine2& place, Vec2 p, Grasped& out) const;
    Placement fit_in_frame(const std::vector<Layer>& layers, Placement p) const;

    GarmentModel model_;
    SimConfig cfg_;
};

// Canonical JSON form, used for golden files and state digests.
std::string state_to_json(const GarmentState& s);
GarmentState state_from_json(const std::string& text);
std::string state_digest(const GarmentState& s);

}  // namespace sis

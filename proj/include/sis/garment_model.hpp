#pragma once

// Canonical flat garment: outline, seams and seam crossings in the table frame, plus the
// reference ("manually flattened") coverage mask used by the metrics.

#include <cstdint>
#include <string>
#include <vector>

#include "sis/coverage_mask.hpp"
#include "sis/detection_fusion.hpp"
#include "sis/geometry.hpp"
#include "sis/seam_codec.hpp"

namespace sis {

// Which side of the cloth a seam can be seen from. Inward seams only show on the front.
enum class SeamFace { both, front, back };

struct CanonicalSeam {
    std::string name;
    SeamCategory category;
    SeamFace face = SeamFace::both;
    Polyline points;
};

struct CanonicalCrossing {
    CrossingType type;
    Vec2 point;
};

class GarmentModel {
public:
    GarmentModel(int width, int height, Polygon outline, std::vector<CanonicalSeam> seams,
                 std::vector<CanonicalCrossing> crossings);

    static GarmentModel load(const std::string& path);
    static GarmentModel from_json(const std::string& text);

    int width() const { return width_; }
    int height() const { return height_; }
    const Polygon& outline() const { return outline_; }
    const std::vector<CanonicalSeam>& seams() const { return seams_; }
    const std::vector<CanonicalCrossing>& crossings() const { return crossings_; }
    Vec2 center() const { return {width_ / 2.0, height_ / 2.0}; }

    const CoverageMask& goal_mask() const { return goal_mask_; }
    std::uint64_t cov_max() const { return cov_max_; }

private:
    int width_;
    int height_;
    Polygon outline_;
    std::vector<CanonicalSeam> seams_;
    std::vector<CanonicalCrossing> crossings_;
    CoverageMask goal_mask_;
    std::uint64_t cov_max_ = 0;
};

}  // namespace sis

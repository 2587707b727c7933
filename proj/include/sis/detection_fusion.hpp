#pragma once

#include <array>
#include <string>
#include <vector>

#include "sis/geometry.hpp"

namespace sis {

enum class CrossingType : int { shoulder = 1, bottom_hem = 2, neck_point = 3 };
enum class DetectionSource : int { scd1 = 1, scd2 = 2 };

inline constexpr std::array<CrossingType, 3> kAllCrossingTypes{CrossingType::shoulder, CrossingType::bottom_hem,
                                                               CrossingType::neck_point};

CrossingType crossing_type_from_int(int c);
const char* to_string(CrossingType c);
const char* to_string(DetectionSource s);

struct CrossingDetection {
    CrossingType type = CrossingType::shoulder;
    double x = 0, y = 0;
    double confidence = 1.0;
    DetectionSource source = DetectionSource::scd1;

    Vec2 point() const { return {x, y}; }
    friend bool operator==(const CrossingDetection&, const CrossingDetection&) = default;
};

struct FusionConfig {
    std::array<int, 3> max_per_type{2, 2, 2};  // indexed by CrossingType - 1
    double dedup_radius = 20.0;

    int cap(CrossingType c) const { return max_per_type[static_cast<int>(c) - 1]; }
};

void validate(const FusionConfig& cfg);
void validate(const CrossingDetection& d);

// Total order used for greedy suppression: type ascending, then confidence descending,
// then x, y ascending, then scd1 before scd2.
bool fusion_order(const CrossingDetection& a, const CrossingDetection& b);

// Union of both detector outputs, deduplicated per type (a detection is suppressed when a
// higher-ranked survivor of the same type lies within dedup_radius), capped per type and
// sorted by fusion_order.
std::vector<CrossingDetection> merge(const std::vector<CrossingDetection>& scd1_out,
                                     const std::vector<CrossingDetection>& scd2_out, const FusionConfig& cfg);

struct DetectionRecord {
    std::string image_id;
    std::vector<CrossingDetection> detections;
};
std::string detection_to_json_line(const DetectionRecord& rec);
DetectionRecord detection_from_json_line(const std::string& line);

}  // namespace sis

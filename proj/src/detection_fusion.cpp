#include "sis/detection_fusion.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "sis/errors.hpp"
#include "sis/jsonl.hpp"

namespace sis {

CrossingType crossing_type_from_int(int c) {
    if (c < 1 || c > 3) throw InputError(fmt::format("crossing type {} not in 1..3", c));
    return static_cast<CrossingType>(c);
}

const char* to_string(CrossingType c) {
    switch (c) {
        case CrossingType::shoulder: return "shoulder";
        case CrossingType::bottom_hem: return "bottom_hem";
        case CrossingType::neck_point: return "neck_point";
    }
    return "?";
}

const char* to_string(DetectionSource s) { return s == DetectionSource::scd1 ? "scd1" : "scd2"; }

void validate(const FusionConfig& cfg) {
    for (int cap : cfg.max_per_type)
        if (cap < 1) throw InputError("fusion caps must be >= 1");
    if (!(cfg.dedup_radius >= 0.0)) throw InputError("dedup_radius must be >= 0");
}

void validate(const CrossingDetection& d) {
    if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) throw InputError("detection confidence outside [0,1]");
    if (!(d.x >= 0.0 && d.y >= 0.0)) throw InputError("detection outside image");
}

bool fusion_order(const CrossingDetection& a, const CrossingDetection& b) {
    if (a.type != b.type) return a.type < b.type;
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.source < b.source;
}

std::vector<CrossingDetection> merge(const std::vector<CrossingDetection>& scd1_out,
                                     const std::vector<CrossingDetection>& scd2_out, const FusionConfig& cfg) {
    validate(cfg);
    std::vector<CrossingDetection> pool;
    pool.reserve(scd1_out.size() + scd2_out.size());
    for (const auto* list : {&scd1_out, &scd2_out})
        for (const auto& d : *list) {
            validate(d);
            pool.push_back(d);
        }
    std::sort(pool.begin(), pool.end(), fusion_order);

    std::vector<CrossingDetection> out;
    std::size_t type_begin = 0;
    int kept = 0;
    for (const auto& d : pool) {
        if (!out.empty() && out.back().type != d.type) {
            type_begin = out.size();
            kept = 0;
        }
        if (kept >= cfg.cap(d.type)) continue;
        bool suppressed = std::any_of(out.begin() + static_cast<std::ptrdiff_t>(type_begin), out.end(),
                                      [&](const CrossingDetection& s) {
                                          return s.type == d.type && distance(s.point(), d.point()) <= cfg.dedup_radius;
                                      });
        if (suppressed) continue;
        out.push_back(d);
        ++kept;
    }
    return out;
}

using jsonl::Json;

std::string detection_to_json_line(const DetectionRecord& rec) {
    Json j;
    j["image_id"] = rec.image_id;
    Json arr = Json::array();
    for (const auto& d : rec.detections) {
        Json e;
        e["c"] = static_cast<int>(d.type);
        e["x"] = jsonl::number(d.x);
        e["y"] = jsonl::number(d.y);
        e["confidence"] = d.confidence;
        e["source"] = to_string(d.source);
        arr.push_back(std::move(e));
    }
    j["detections"] = std::move(arr);
    return j.dump();
}

DetectionRecord detection_from_json_line(const std::string& line) {
    Json j = Json::parse(line);
    DetectionRecord rec;
    rec.image_id = jsonl::get_string(j, "image_id");
    for (const Json& e : jsonl::get_array(j, "detections")) {
        CrossingDetection d;
        d.type = crossing_type_from_int(static_cast<int>(jsonl::get_int(e, "c")));
        d.x = jsonl::get_number(e, "x");
        d.y = jsonl::get_number(e, "y");
        d.confidence = jsonl::get_number(e, "confidence");
        std::string src = jsonl::get_string(e, "source");
        if (src == "scd1")
            d.source = DetectionSource::scd1;
        else if (src == "scd2")
            d.source = DetectionSource::scd2;
        else
            throw DataError(fmt::format("unknown detection source '{}'", src));
        validate(d);
        rec.detections.push_back(d);
    }
    return rec;
}

}  // namespace sis

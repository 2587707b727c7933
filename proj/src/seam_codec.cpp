#include "sis/seam_codec.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sis/errors.hpp"
#include "sis/jsonl.hpp"

namespace sis {

SeamCategory seam_category_from_int(int j) {
    if (j < 1 || j > 4) throw InputError(fmt::format("seam category {} not in 1..4", j));
    return static_cast<SeamCategory>(j);
}

Orientation orientation_from_int(int i) {
    if (i < 1 || i > 4) throw InputError(fmt::format("orientation subclass {} not in 1..4", i));
    return static_cast<Orientation>(i);
}

const char* to_string(SeamCategory c) {
    switch (c) {
        case SeamCategory::solid: return "solid";
        case SeamCategory::dotted: return "dotted";
        case SeamCategory::inward: return "inward";
        case SeamCategory::neckline: return "neckline";
    }
    return "?";
}

const char* to_string(Orientation o) {
    switch (o) {
        case Orientation::downward_diagonal: return "downward_diagonal";
        case Orientation::upward_diagonal: return "upward_diagonal";
        case Orientation::horizontal: return "horizontal";
        case Orientation::vertical: return "vertical";
    }
    return "?";
}

const char* to_string(ImageTransform t) {
    switch (t) {
        case ImageTransform::flip_horizontal: return "flip_horizontal";
        case ImageTransform::flip_vertical: return "flip_vertical";
        case ImageTransform::rotate_90cw: return "rotate_90cw";
        case ImageTransform::rotate_180: return "rotate_180";
        case ImageTransform::rotate_90ccw: return "rotate_90ccw";
    }
    return "?";
}

ImageTransform image_transform_from_string(const std::string& s) {
    for (ImageTransform t : kAllTransforms)
        if (s == to_string(t)) return t;
    throw InputError(fmt::format("unknown image transform '{}'", s));
}

void validate(const CodecConfig& cfg) {
    if (!(cfg.lambda_thres >= 1.0)) throw InputError("lambda_thres must be >= 1");
    if (cfg.width < 1 || cfg.height < 1) throw InputError("image size must be positive");
}

namespace {

bool in_bounds(double x, double y, const CodecConfig& cfg) {
    return x >= 0.0 && y >= 0.0 && x < cfg.width && y < cfg.height;
}

double half_floor(double v) { return std::floor(v / 2.0); }

}  // namespace

void validate(const SeamLineSegment& seg, const CodecConfig& cfg) {
    if (!in_bounds(seg.x1, seg.y1, cfg) || !in_bounds(seg.x2, seg.y2, cfg))
        throw InputError(fmt::format("segment ({},{})-({},{}) outside {}x{} image", seg.x1, seg.y1, seg.x2, seg.y2,
                                     cfg.width, cfg.height));
    if (seg.x1 == seg.x2 && seg.y1 == seg.y2) throw InputError("degenerate segment: endpoints coincide");
}

void validate(const OrientedSeamBox& box, const CodecConfig& cfg) {
    if (!(box.w_hat > 0.0) || !(box.h_hat > 0.0)) throw InputError("box extents must be positive");
    if (std::max(box.w_hat, box.h_hat) < cfg.lambda_thres) throw InputError("box smaller than lambda_thres");
    if (!in_bounds(box.x, box.y, cfg)) throw InputError("box center outside image");
}

std::optional<OrientedSeamBox> encode(const SeamLineSegment& seg, const CodecConfig& cfg) {
    validate(cfg);
    validate(seg, cfg);
    const double lambda = cfg.lambda_thres;
    const double w = std::abs(seg.x2 - seg.x1);
    const double h = std::abs(seg.y2 - seg.y1);

    OrientedSeamBox box;
    box.category = seg.category;
    box.x = 0.5 * (seg.x1 + seg.x2);
    box.y = 0.5 * (seg.y1 + seg.y2);
    box.w_hat = w;
    box.h_hat = h;

    if (w < lambda && h < lambda) return std::nullopt;
    if (w < lambda) {
        box.orientation = Orientation::vertical;
        box.w_hat = std::max(1.0, half_floor(h));
    } else if (h < lambda) {
        box.orientation = Orientation::horizontal;
        box.h_hat = std::max(1.0, half_floor(w));
    } else if ((seg.x1 < seg.x2 && seg.y1 > seg.y2) || (seg.x1 > seg.x2 && seg.y1 < seg.y2)) {
        box.orientation = Orientation::upward_diagonal;
    } else {
        box.orientation = Orientation::downward_diagonal;
    }
    return box;
}

SeamLineSegment decode(const OrientedSeamBox& box) {
    const double hw = box.w_hat / 2.0, hh = box.h_hat / 2.0;
    SeamLineSegment s;
    s.category = box.category;
    switch (box.orientation) {
        case Orientation::downward_diagonal:
            s = {box.category, box.x - hw, box.y - hh, box.x + hw, box.y + hh};
            break;
        case Orientation::upward_diagonal:
            s = {box.category, box.x - hw, box.y + hh, box.x + hw, box.y - hh};
            break;
        case Orientation::horizontal:
            s = {box.category, box.x - hw, box.y, box.x + hw, box.y};
            break;
        case Orientation::vertical:
            s = {box.category, box.x, box.y - hh, box.x, box.y + hh};
            break;
    }
    return s;
}

Vec2 transform_point(Vec2 p, ImageTransform t, const CodecConfig& cfg) {
    const double wm = cfg.width - 1.0, hm = cfg.height - 1.0;
    switch (t) {
        case ImageTransform::flip_horizontal: return {wm - p.x, p.y};
        case ImageTransform::flip_vertical: return {p.x, hm - p.y};
        case ImageTransform::rotate_90cw: return {hm - p.y, p.x};
        case ImageTransform::rotate_180: return {wm - p.x, hm - p.y};
        case ImageTransform::rotate_90ccw: return {p.y, wm - p.x};
    }
    return p;
}

CodecConfig transform_config(const CodecConfig& cfg, ImageTransform t) {
    CodecConfig out = cfg;
    if (t == ImageTransform::rotate_90cw || t == ImageTransform::rotate_90ccw) std::swap(out.width, out.height);
    return out;
}

SeamLineSegment transform_segment(const SeamLineSegment& seg, ImageTransform t, const CodecConfig& cfg) {
    Vec2 a = transform_point({seg.x1, seg.y1}, t, cfg);
    Vec2 b = transform_point({seg.x2, seg.y2}, t, cfg);
    return {seg.category, a.x, a.y, b.x, b.y};
}

RecategorizedBox recategorize(const OrientedSeamBox& box, ImageTransform t, const CodecConfig& cfg) {
    validate(box, cfg);
    const CodecConfig out_cfg = transform_config(cfg, t);
    auto encoded = encode(transform_segment(decode(box), t, cfg), out_cfg);
    // A valid box always decodes to a segment whose major extent is >= lambda.
    if (!encoded) throw InputError("box decodes to a segment below lambda_thres");
    return {*encoded, out_cfg};
}

std::array<SeamPoint, 3> grasp_candidates_from_box(const OrientedSeamBox& box) {
    SeamLineSegment s = decode(box);
    Vec2 a{s.x1, s.y1}, b{s.x2, s.y2};
    return {SeamPoint{a, box.category}, SeamPoint{0.5 * (a + b), box.category}, SeamPoint{b, box.category}};
}

// JSONL ----------------------------------------------------------------------

using jsonl::Json;

std::string annotation_to_json_line(const AnnotationRecord& rec) {
    Json j;
    j["image_id"] = rec.image_id;
    j["width"] = rec.width;
    j["height"] = rec.height;
    Json segs = Json::array();
    for (const auto& s : rec.segments) {
        Json e;
        e["j"] = static_cast<int>(s.category);
        e["x1"] = jsonl::number(s.x1);
        e["y1"] = jsonl::number(s.y1);
        e["x2"] = jsonl::number(s.x2);
        e["y2"] = jsonl::number(s.y2);
        segs.push_back(std::move(e));
    }
    j["segments"] = std::move(segs);
    return j.dump();
}

AnnotationRecord annotation_from_json_line(const std::string& line) {
    Json j = Json::parse(line);
    AnnotationRecord rec;
    rec.image_id = jsonl::get_string(j, "image_id");
    rec.width = static_cast<int>(jsonl::get_int(j, "width"));
    rec.height = static_cast<int>(jsonl::get_int(j, "height"));
    CodecConfig cfg{1.0, rec.width, rec.height};
    validate(cfg);
    for (const Json& e : jsonl::get_array(j, "segments")) {
        SeamLineSegment s{seam_category_from_int(static_cast<int>(jsonl::get_int(e, "j"))),
                          jsonl::get_number(e, "x1"), jsonl::get_number(e, "y1"), jsonl::get_number(e, "x2"),
                          jsonl::get_number(e, "y2")};
        validate(s, cfg);
        rec.segments.push_back(s);
    }
    return rec;
}

std::string label_to_json_line(const LabelRecord& rec) {
    Json j;
    j["image_id"] = rec.image_id;
    j["width"] = rec.width;
    j["height"] = rec.height;
    Json boxes = Json::array();
    for (const auto& b : rec.boxes) {
        Json e;
        e["s_i"] = static_cast<int>(b.orientation);
        e["s_j"] = static_cast<int>(b.category);
        e["x"] = jsonl::number(b.x);
        e["y"] = jsonl::number(b.y);
        e["w_hat"] = jsonl::number(b.w_hat);
        e["h_hat"] = jsonl::number(b.h_hat);
        boxes.push_back(std::move(e));
    }
    j["boxes"] = std::move(boxes);
    return j.dump();
}

LabelRecord label_from_json_line(const std::string& line) {
    Json j = Json::parse(line);
    LabelRecord rec;
    rec.image_id = jsonl::get_string(j, "image_id");
    rec.width = static_cast<int>(jsonl::get_int(j, "width"));
    rec.height = static_cast<int>(jsonl::get_int(j, "height"));
    for (const Json& e : jsonl::get_array(j, "boxes")) {
        OrientedSeamBox b;
        b.orientation = orientation_from_int(static_cast<int>(jsonl::get_int(e, "s_i")));
        b.category = seam_category_from_int(static_cast<int>(jsonl::get_int(e, "s_j")));
        b.x = jsonl::get_number(e, "x");
        b.y = jsonl::get_number(e, "y");
        b.w_hat = jsonl::get_number(e, "w_hat");
        b.h_hat = jsonl::get_number(e, "h_hat");
        rec.boxes.push_back(b);
    }
    return rec;
}

std::vector<AnnotationRecord> read_annotations(const std::string& path) {
    std::vector<AnnotationRecord> out;
    jsonl::for_each_line(path, [&](const Json& j, std::size_t) { out.push_back(annotation_from_json_line(j.dump())); });
    return out;
}

void write_annotations(const std::string& path, const std::vector<AnnotationRecord>& records) {
    std::vector<std::string> lines;
    for (const auto& r : records) lines.push_back(annotation_to_json_line(r));
    jsonl::write_lines(path, lines);
}

std::vector<LabelRecord> read_labels(const std::string& path) {
    std::vector<LabelRecord> out;
    jsonl::for_each_line(path, [&](const Json& j, std::size_t) { out.push_back(label_from_json_line(j.dump())); });
    return out;
}

void write_labels(const std::string& path, const std::vector<LabelRecord>& records) {
    std::vector<std::string> lines;
    for (const auto& r : records) lines.push_back(label_to_json_line(r));
    jsonl::write_lines(path, lines);
}

LabelRecord encode_record(const AnnotationRecord& rec, double lambda_thres) {
    CodecConfig cfg{lambda_thres, rec.width, rec.height};
    LabelRecord out{rec.image_id, rec.width, rec.height, {}};
    for (const auto& s : rec.segments)
        if (auto box = encode(s, cfg)) out.boxes.push_back(*box);
    return out;
}

}  // namespace sis

#pragma once

// Oriented-line seam codec: straight seam segments <-> oriented bounding-box labels.
//
// A segment [j, x1, y1, x2, y2] becomes a box [s_ij, x, y, w_hat, h_hat] where the
// orientation subclass i records which diagonal of the axis-aligned box the segment
// occupies. Near-axis segments thinner than lambda_thres are inflated along the minor
// axis to half the major extent; segments small in both axes are dropped.
//
// Coordinates live on the half-pixel grid: endpoints are integer pixels for annotated
// data, box centers are exact midpoints. Every value involved is exactly representable
// as a double, so equality comparisons below are exact.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sis/geometry.hpp"

namespace sis {

enum class SeamCategory : int { solid = 1, dotted = 2, inward = 3, neckline = 4 };
enum class Orientation : int { downward_diagonal = 1, upward_diagonal = 2, horizontal = 3, vertical = 4 };
enum class ImageTransform { flip_horizontal, flip_vertical, rotate_90cw, rotate_180, rotate_90ccw };

inline constexpr std::array<ImageTransform, 5> kAllTransforms{
    ImageTransform::flip_horizontal, ImageTransform::flip_vertical, ImageTransform::rotate_90cw,
    ImageTransform::rotate_180, ImageTransform::rotate_90ccw};

SeamCategory seam_category_from_int(int j);
Orientation orientation_from_int(int i);
const char* to_string(SeamCategory c);
const char* to_string(Orientation o);
const char* to_string(ImageTransform t);
ImageTransform image_transform_from_string(const std::string& s);

struct SeamLineSegment {
    SeamCategory category = SeamCategory::solid;
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

    friend bool operator==(const SeamLineSegment&, const SeamLineSegment&) = default;
};

struct OrientedSeamBox {
    Orientation orientation = Orientation::downward_diagonal;
    SeamCategory category = SeamCategory::solid;
    double x = 0, y = 0;  // center
    double w_hat = 0, h_hat = 0;

    friend bool operator==(const OrientedSeamBox&, const OrientedSeamBox&) = default;
};

struct CodecConfig {
    double lambda_thres = 10.0;
    int width = 1280;
    int height = 1024;

    friend bool operator==(const CodecConfig&, const CodecConfig&) = default;
};

void validate(const CodecConfig& cfg);
void validate(const SeamLineSegment& seg, const CodecConfig& cfg);
void validate(const OrientedSeamBox& box, const CodecConfig& cfg);

// Returns std::nullopt when the label is dropped (both extents below lambda_thres).
// Throws InputError for out-of-bounds or degenerate segments.
std::optional<OrientedSeamBox> encode(const SeamLineSegment& seg, const CodecConfig& cfg);

// Endpoints are emitted left-to-right, ties top-to-bottom.
SeamLineSegment decode(const OrientedSeamBox& box);

// Image-space transforms used for augmentation. Rotations swap width and height.
Vec2 transform_point(Vec2 p, ImageTransform t, const CodecConfig& cfg);
SeamLineSegment transform_segment(const SeamLineSegment& seg, ImageTransform t, const CodecConfig& cfg);
CodecConfig transform_config(const CodecConfig& cfg, ImageTransform t);

struct RecategorizedBox {
    OrientedSeamBox box;
    CodecConfig config;  // image size after the transform
};
RecategorizedBox recategorize(const OrientedSeamBox& box, ImageTransform t, const CodecConfig& cfg);

struct SeamPoint {
    Vec2 point;
    SeamCategory category;
};
// Decoded endpoints and midpoint, in that order: first endpoint, midpoint, second endpoint.
std::array<SeamPoint, 3> grasp_candidates_from_box(const OrientedSeamBox& box);

// JSONL label files ----------------------------------------------------------

struct AnnotationRecord {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::vector<SeamLineSegment> segments;
};

struct LabelRecord {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::vector<OrientedSeamBox> boxes;
};

std::vector<AnnotationRecord> read_annotations(const std::string& path);
void write_annotations(const std::string& path, const std::vector<AnnotationRecord>& records);
std::vector<LabelRecord> read_labels(const std::string& path);
void write_labels(const std::string& path, const std::vector<LabelRecord>& records);

std::string annotation_to_json_line(const AnnotationRecord& rec);
AnnotationRecord annotation_from_json_line(const std::string& line);
std::string label_to_json_line(const LabelRecord& rec);
LabelRecord label_from_json_line(const std::string& line);

// Encodes every segment of an annotation record; dropped segments are omitted.
LabelRecord encode_record(const AnnotationRecord& rec, double lambda_thres);

}  // namespace sis

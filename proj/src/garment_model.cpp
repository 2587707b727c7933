#include "sis/garment_model.hpp"

#include <fmt/format.h>

#include "sis/errors.hpp"
#include "sis/jsonl.hpp"

namespace sis {

GarmentModel::GarmentModel(int width, int height, Polygon outline, std::vector<CanonicalSeam> seams,
                           std::vector<CanonicalCrossing> crossings)
    : width_(width),
      height_(height),
      outline_(std::move(outline)),
      seams_(std::move(seams)),
      crossings_(std::move(crossings)) {
    if (outline_.size() < 3) throw DataError("garment outline needs at least 3 vertices");
    for (const auto& s : seams_)
        if (s.points.size() < 2) throw DataError(fmt::format("seam '{}' needs at least 2 points", s.name));
    const Polygon polys[] = {outline_};
    goal_mask_ = rasterize(polys, width_, height_);
    cov_max_ = goal_mask_.popcount();
    if (cov_max_ == 0) throw DataError("garment outline covers no pixels");
}

namespace {

Vec2 parse_point(const jsonl::Json& p) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        throw DataError("points must be [x, y]");
    return {p[0].get<double>(), p[1].get<double>()};
}

SeamFace parse_face(const std::string& s) {
    if (s == "both") return SeamFace::both;
    if (s == "front") return SeamFace::front;
    if (s == "back") return SeamFace::back;
    throw DataError(fmt::format("unknown seam face '{}'", s));
}

}  // namespace

GarmentModel GarmentModel::from_json(const std::string& text) {
    jsonl::Json j;
    try {
        j = jsonl::Json::parse(text);
    } catch (const jsonl::Json::parse_error& e) {
        throw DataError(fmt::format("malformed garment JSON: {}", e.what()));
    }
    if (jsonl::get_int(j, "schema_version") != 1) throw DataError("unsupported garment schema_version");
    const auto& frame = jsonl::get_array(j, "frame");
    if (frame.size() != 2) throw DataError("frame must be [width, height]");
    Polygon outline;
    for (const auto& p : jsonl::get_array(j, "outline")) outline.push_back(parse_point(p));
    std::vector<CanonicalSeam> seams;
    for (const auto& s : jsonl::get_array(j, "seams")) {
        CanonicalSeam seam;
        seam.name = jsonl::get_string(s, "name");
        try {
            seam.category = seam_category_from_int(static_cast<int>(jsonl::get_int(s, "j")));
        } catch (const InputError& e) {
            throw DataError(e.what());
        }
        seam.face = parse_face(jsonl::get_string(s, "face"));
        for (const auto& p : jsonl::get_array(s, "points")) seam.points.push_back(parse_point(p));
        seams.push_back(std::move(seam));
    }
    std::vector<CanonicalCrossing> crossings;
    for (const auto& c : jsonl::get_array(j, "crossings")) {
        try {
            crossings.push_back({crossing_type_from_int(static_cast<int>(jsonl::get_int(c, "c"))),
                                 {jsonl::get_number(c, "x"), jsonl::get_number(c, "y")}});
        } catch (const InputError& e) {
            throw DataError(e.what());
        }
    }
    return GarmentModel(frame[0].get<int>(), frame[1].get<int>(), std::move(outline), std::move(seams),
                        std::move(crossings));
}

GarmentModel GarmentModel::load(const std::string& path) {
    try {
        return from_json(jsonl::read_file(path));
    } catch (const DataError& e) {
        throw DataError(fmt::format("{}: {}", path, e.what()));
    }
}

}  // namespace sis

#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace sis {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

using Polygon = std::vector<Vec2>;
using Polyline = std::vector<Vec2>;

// Oriented line: points p with dot(p - origin, normal) > 0 are on the positive side.
struct Line {
    Vec2 origin;
    Vec2 normal;  // unit length

    double side(Vec2 p) const { return dot(p - origin, normal); }
    static Line through(Vec2 a, Vec2 b);
    friend bool operator==(const Line&, const Line&) = default;
};

// Rigid or reflective 2D map  p -> A p + t.
struct Affine2 {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;  // row-major [a b; c d]
    Vec2 t{};

    Vec2 apply(Vec2 p) const { return {a * p.x + b * p.y + t.x, c * p.x + d * p.y + t.y}; }
    Affine2 then(const Affine2& next) const;  // next ∘ this
    Affine2 inverse() const;
    double det() const { return a * d - b * c; }

    static Affine2 identity() { return {}; }
    static Affine2 rotation_about(Vec2 center, double theta);
    static Affine2 translation(Vec2 offset);
    static Affine2 reflection(const Line& line);
};

Polygon transform(const Polygon& poly, const Affine2& m);

double signed_area(std::span<const Vec2> poly);
inline double area(std::span<const Vec2> poly) { return std::abs(signed_area(poly)); }
Vec2 centroid(std::span<const Vec2> poly);

// Even-odd inclusion; boundary points are unspecified.
bool contains(std::span<const Vec2> poly, Vec2 p);
double distance_to_boundary(std::span<const Vec2> poly, Vec2 p);

// Part of the polygon on the positive (keep_positive) or non-positive side of the line.
// Non-convex inputs may produce zero-width bridges along the line; these are harmless
// under even-odd filling.
Polygon clip_half_plane(const Polygon& poly, const Line& line, bool keep_positive);

// Parameter intervals [t0, t1] ⊂ [0, 1] of segment a→b lying inside the polygon.
struct Interval {
    double t0;
    double t1;
};
std::vector<Interval> segment_inside(std::span<const Vec2> poly, Vec2 a, Vec2 b);

// Complement of a sorted, non-overlapping interval set within [0, 1].
std::vector<Interval> complement(const std::vector<Interval>& inside);

// Intersection of two interval sets.
std::vector<Interval> intersect(const std::vector<Interval>& a, const std::vector<Interval>& b);

struct BBox {
    double min_x, min_y, max_x, max_y;
};
BBox bounds(std::span<const Vec2> poly);

}  // namespace sis

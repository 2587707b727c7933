#include "sis/geometry.hpp"

#include <algorithm>
#include <limits>

namespace sis {

Line Line::through(Vec2 a, Vec2 b) {
    Vec2 dir = b - a;
    double len = norm(dir);
    // Left normal of the direction (in y-down image coordinates this points "up-right" for +x).
    return {a, {-dir.y / len, dir.x / len}};
}

Affine2 Affine2::then(const Affine2& n) const {
    Affine2 r;
    r.a = n.a * a + n.b * c;
    r.b = n.a * b + n.b * d;
    r.c = n.c * a + n.d * c;
    r.d = n.c * b + n.d * d;
    r.t = n.apply(t);
    return r;
}

Affine2 Affine2::inverse() const {
    double det_ = det();
    Affine2 r;
    r.a = d / det_;
    r.b = -b / det_;
    r.c = -c / det_;
    r.d = a / det_;
    r.t = {-(r.a * t.x + r.b * t.y), -(r.c * t.x + r.d * t.y)};
    return r;
}

Affine2 Affine2::rotation_about(Vec2 center, double theta) {
    double cs = std::cos(theta), sn = std::sin(theta);
    Affine2 r{cs, -sn, sn, cs, {}};
    r.t = center - Vec2{cs * center.x - sn * center.y, sn * center.x + cs * center.y};
    return r;
}

Affine2 Affine2::translation(Vec2 offset) { return {1.0, 0.0, 0.0, 1.0, offset}; }

Affine2 Affine2::reflection(const Line& line) {
    // p' = p - 2 (n·(p - o)) n
    Vec2 n = line.normal;
    Affine2 r{1.0 - 2.0 * n.x * n.x, -2.0 * n.x * n.y, -2.0 * n.x * n.y, 1.0 - 2.0 * n.y * n.y, {}};
    double k = 2.0 * dot(n, line.origin);
    r.t = {k * n.x, k * n.y};
    return r;
}

Polygon transform(const Polygon& poly, const Affine2& m) {
    Polygon out;
    out.reserve(poly.size());
    for (Vec2 p : poly) out.push_back(m.apply(p));
    return out;
}

double signed_area(std::span<const Vec2> poly) {
    double s = 0.0;
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) s += cross(poly[i], poly[(i + 1) % n]);
    return 0.5 * s;
}

Vec2 centroid(std::span<const Vec2> poly) {
    double a = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
        Vec2 p = poly[i], q = poly[(i + 1) % n];
        double w = cross(p, q);
        a += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    if (std::abs(a) < 1e-12) {
        Vec2 m{};
        for (Vec2 p : poly) m = m + p;
        return (1.0 / static_cast<double>(std::max<std::size_t>(poly.size(), 1))) * m;
    }
    return {cx / (3.0 * a), cy / (3.0 * a)};
}

bool contains(std::span<const Vec2> poly, Vec2 p) {
    bool inside = false;
    for (std::size_t i = 0, n = poly.size(), j = n - 1; i < n; j = i++) {
        Vec2 a = poly[i], b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

double distance_to_boundary(std::span<const Vec2> poly, Vec2 p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
        Vec2 a = poly[i], b = poly[(i + 1) % n];
        Vec2 ab = b - a;
        double len2 = dot(ab, ab);
        double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
        best = std::min(best, distance(p, a + t * ab));
    }
    return best;
}

Polygon clip_half_plane(const Polygon& poly, const Line& line, bool keep_positive) {
    Polygon out;
    const std::size_t n = poly.size();
    if (n == 0) return out;
    auto inside = [&](double s) { return keep_positive ? s > 0.0 : s <= 0.0; };
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 cur = poly[i], nxt = poly[(i + 1) % n];
        double sc = line.side(cur), sn = line.side(nxt);
        bool ic = inside(sc), in_ = inside(sn);
        if (ic) out.push_back(cur);
        if (ic != in_) {
            double t = sc / (sc - sn);
            out.push_back(cur + t * (nxt - cur));
        }
    }
    if (out.size() < 3) out.clear();
    return out;
}

std::vector<Interval> segment_inside(std::span<const Vec2> poly, Vec2 a, Vec2 b) {
    std::vector<double> ts{0.0, 1.0};
    Vec2 d = b - a;
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
        Vec2 p = poly[i], q = poly[(i + 1) % n];
        Vec2 e = q - p;
        double den = cross(d, e);
        if (std::abs(den) < 1e-12) continue;
        double t = cross(p - a, e) / den;
        double u = cross(p - a, d) / den;
        if (t > 0.0 && t < 1.0 && u >= 0.0 && u <= 1.0) ts.push_back(t);
    }
    std::sort(ts.begin(), ts.end());
    std::vector<Interval> out;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        double t0 = ts[i], t1 = ts[i + 1];
        if (t1 - t0 < 1e-12) continue;
        if (!contains(poly, a + (0.5 * (t0 + t1)) * d)) continue;
        if (!out.empty() && out.back().t1 >= t0 - 1e-12)
            out.back().t1 = t1;
        else
            out.push_back({t0, t1});
    }
    return out;
}

std::vector<Interval> complement(const std::vector<Interval>& inside) {
    std::vector<Interval> out;
    double cursor = 0.0;
    for (const Interval& iv : inside) {
        if (iv.t0 > cursor) out.push_back({cursor, iv.t0});
        cursor = std::max(cursor, iv.t1);
    }
    if (cursor < 1.0) out.push_back({cursor, 1.0});
    return out;
}

std::vector<Interval> intersect(const std::vector<Interval>& a, const std::vector<Interval>& b) {
    std::vector<Interval> out;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        double lo = std::max(a[i].t0, b[j].t0);
        double hi = std::min(a[i].t1, b[j].t1);
        if (hi > lo) out.push_back({lo, hi});
        if (a[i].t1 < b[j].t1)
            ++i;
        else
            ++j;
    }
    return out;
}

BBox bounds(std::span<const Vec2> poly) {
    BBox bb{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (Vec2 p : poly) {
        bb.min_x = std::min(bb.min_x, p.x);
        bb.min_y = std::min(bb.min_y, p.y);
        bb.max_x = std::max(bb.max_x, p.x);
        bb.max_y = std::max(bb.max_y, p.y);
    }
    return bb;
}

}  // namespace sis

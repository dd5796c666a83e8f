#pragma once

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>
#include <boost/geometry/geometries/linestring.hpp>
#include <boost/geometry/geometries/box.hpp>

#include <array>
#include <cmath>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace qps {

namespace bg = boost::geometry;

// Snap tolerance for geometric equality (meters).
inline constexpr double kEps = 1e-6;
// Dead-band around 90 degrees for the "right" qualitative angle.
inline constexpr double kEpsAngleDeg = 0.01;
// Cells smaller than this are accepted on the representative's word alone.
inline constexpr double kMinCellArea = 0.01;
// Circles become regular polygons with this many segments for boolean ops.
inline constexpr int kCircleSegments = 64;

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    bool operator==(const Vec2&) const = default;

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
    Vec2 normalized() const {
        double n = norm();
        if (n == 0.0) throw DataError("cannot normalize zero vector");
        return {x / n, y / n};
    }
    Vec2 perp() const { return {-y, x}; }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

// Compass bearing in degrees, [0, 360): 0 = +y, clockwise positive.
inline double bearing_deg(Vec2 from, Vec2 to) {
    Vec2 d = to - from;
    double b = std::atan2(d.x, d.y) * 180.0 / M_PI;
    if (b < 0.0) b += 360.0;
    return b;
}

// Interior angle at `apex` between rays to a and b, degrees in [0, 180].
inline double angle_at_deg(Vec2 apex, Vec2 a, Vec2 b) {
    Vec2 u = a - apex, v = b - apex;
    double ang = std::atan2(std::fabs(u.cross(v)), u.dot(v)) * 180.0 / M_PI;
    return ang;
}

using BPoint = bg::model::d2::point_xy<double>;
using Polygon = bg::model::polygon<BPoint>;
using MultiPolygon = bg::model::multi_polygon<Polygon>;
using Linestring = bg::model::linestring<BPoint>;
using Box = bg::model::box<BPoint>;

inline BPoint to_bpoint(Vec2 v) { return BPoint(v.x, v.y); }
inline Vec2 to_vec(const BPoint& p) { return {bg::get<0>(p), bg::get<1>(p)}; }

inline double area_of(const Polygon& p) { return std::fabs(bg::area(p)); }
inline double area_of(const MultiPolygon& p) { return std::fabs(bg::area(p)); }

inline bool contains_point(const Polygon& poly, Vec2 p) {
    return bg::within(to_bpoint(p), poly);
}
inline bool contains_point(const MultiPolygon& poly, Vec2 p) {
    return bg::within(to_bpoint(p), poly);
}

inline MultiPolygon to_multi(const Polygon& p) {
    MultiPolygon m;
    m.push_back(p);
    return m;
}

inline std::vector<Polygon> components(const MultiPolygon& m) {
    return std::vector<Polygon>(m.begin(), m.end());
}

// Discretized disk centred at c.  Vertices start at angle `phase`.
inline Polygon circle_polygon(Vec2 c, double r, int segments = kCircleSegments,
                              double phase = 0.0) {
    if (r <= 0.0) throw DataError("circle radius must be positive");
    Polygon poly;
    for (int i = 0; i < segments; ++i) {
        double a = phase + 2.0 * M_PI * i / segments;
        poly.outer().emplace_back(c.x + r * std::cos(a), c.y + r * std::sin(a));
    }
    bg::correct(poly);
    return poly;
}

// Half-disk on the side of `facing` (unit vector), flat edge through c.
inline Polygon half_disk_polygon(Vec2 c, double r, Vec2 facing,
                                 int segments = kCircleSegments) {
    Vec2 f = facing.normalized();
    double a0 = std::atan2(f.y, f.x) - M_PI / 2.0;
    Polygon poly;
    int half = segments / 2;
    for (int i = 0; i <= half; ++i) {
        double a = a0 + M_PI * i / half;
        poly.outer().emplace_back(c.x + r * std::cos(a), c.y + r * std::sin(a));
    }
    bg::correct(poly);
    return poly;
}

inline Box bounding_box(const Polygon& p) {
    Box b;
    bg::envelope(p, b);
    return b;
}
inline Box bounding_box(const MultiPolygon& p) {
    Box b;
    bg::envelope(p, b);
    return b;
}

// Rectangle covering the half-plane n.(q - p) >= 0 out to `extent`.
inline Polygon half_plane_polygon(Vec2 p, Vec2 dir, int side, double extent) {
    Vec2 d = dir.normalized();
    Vec2 n = d.perp() * static_cast<double>(side);
    Vec2 a = p - d * extent;
    Vec2 b = p + d * extent;
    Polygon poly;
    poly.outer().push_back(to_bpoint(a));
    poly.outer().push_back(to_bpoint(b));
    poly.outer().push_back(to_bpoint(b + n * extent));
    poly.outer().push_back(to_bpoint(a + n * extent));
    bg::correct(poly);
    return poly;
}

// Splits `piece` by the line through p with direction dir.  Pieces smaller
// than `min_area` on one side are not emitted (the cut was tangent).
inline std::vector<Polygon> split_by_line(const Polygon& piece, Vec2 p, Vec2 dir,
                                          double min_area = kEps * kEps) {
    Box bb = bounding_box(piece);
    Vec2 lo = to_vec(bb.min_corner()), hi = to_vec(bb.max_corner());
    double extent = (hi - lo).norm() + distance(p, (lo + hi) / 2.0) + 1.0;
    std::vector<Polygon> out;
    for (int side : {+1, -1}) {
        Polygon hp = half_plane_polygon(p, dir, side, 2.0 * extent);
        MultiPolygon inter;
        bg::intersection(piece, hp, inter);
        for (auto& q : inter)
            if (area_of(q) > min_area) out.push_back(std::move(q));
    }
    return out;
}

inline std::vector<Polygon> split_by_circle(const Polygon& piece, Vec2 c, double r,
                                            double min_area = kEps * kEps) {
    Polygon disk = circle_polygon(c, r);
    std::vector<Polygon> out;
    MultiPolygon inside, outside;
    bg::intersection(piece, disk, inside);
    bg::difference(piece, disk, outside);
    for (auto& q : inside)
        if (area_of(q) > min_area) out.push_back(std::move(q));
    for (auto& q : outside)
        if (area_of(q) > min_area) out.push_back(std::move(q));
    return out;
}

// Signed distance from p to the polygon boundary: positive inside.
inline double signed_boundary_distance(const Polygon& poly, Vec2 p) {
    double d = std::numeric_limits<double>::max();
    auto ring_dist = [&](const Polygon::ring_type& ring) {
        Linestring ls(ring.begin(), ring.end());
        d = std::min(d, bg::distance(to_bpoint(p), ls));
    };
    ring_dist(poly.outer());
    for (const auto& inner : poly.inners()) ring_dist(inner);
    return contains_point(poly, p) ? d : -d;
}

// Pole of inaccessibility: deterministic interior point maximizing the
// distance to the boundary (quadtree refinement, mapbox polylabel scheme).
inline Vec2 pole_of_inaccessibility(const Polygon& poly, double precision = 1e-4) {
    Box bb = bounding_box(poly);
    Vec2 lo = to_vec(bb.min_corner()), hi = to_vec(bb.max_corner());
    double w = hi.x - lo.x, h = hi.y - lo.y;
    double cell = std::min(w, h) / 2.0;
    if (cell <= 0.0) return (lo + hi) / 2.0;

    struct Cell {
        Vec2 c;
        double half;
        double d;    // signed distance at centre
        double max;  // upper bound for the cell
    };
    auto make_cell = [&](Vec2 c, double half) {
        double d = signed_boundary_distance(poly, c);
        return Cell{c, half, d, d + half * std::sqrt(2.0)};
    };
    auto cmp = [](const Cell& a, const Cell& b) { return a.max < b.max; };
    std::priority_queue<Cell, std::vector<Cell>, decltype(cmp)> queue(cmp);

    for (double x = lo.x; x < hi.x; x += cell * 2.0)
        for (double y = lo.y; y < hi.y; y += cell * 2.0)
            queue.push(make_cell({x + cell, y + cell}, cell));

    Cell best = make_cell((lo + hi) / 2.0, 0.0);
    {
        bg::model::polygon<BPoint> tmp;  // centroid as a second seed
        BPoint c;
        bg::centroid(poly, c);
        Cell cc = make_cell(to_vec(c), 0.0);
        if (cc.d > best.d) best = cc;
    }
    while (!queue.empty()) {
        Cell cur = queue.top();
        queue.pop();
        if (cur.d > best.d) best = cur;
        if (cur.max - best.d <= precision) continue;
        double q = cur.half / 2.0;
        queue.push(make_cell({cur.c.x - q, cur.c.y - q}, q));
        queue.push(make_cell({cur.c.x + q, cur.c.y - q}, q));
        queue.push(make_cell({cur.c.x - q, cur.c.y + q}, q));
        queue.push(make_cell({cur.c.x + q, cur.c.y + q}, q));
    }
    return best.c;
}

inline std::string to_wkt(const Polygon& p) {
    std::ostringstream os;
    os.precision(17);
    os << bg::wkt(p);
    return os.str();
}

inline Polygon polygon_from_wkt(const std::string& wkt) {
    Polygon p;
    try {
        bg::read_wkt(wkt, p);
    } catch (const std::exception& e) {
        throw ParseError(std::string("bad WKT polygon: ") + e.what());
    }
    bg::correct(p);
    return p;
}

inline MultiPolygon multipolygon_from_wkt(const std::string& wkt) {
    MultiPolygon m;
    if (wkt.find("MULTIPOLYGON") != std::string::npos) {
        try {
            bg::read_wkt(wkt, m);
        } catch (const std::exception& e) {
            throw ParseError(std::string("bad WKT multipolygon: ") + e.what());
        }
        bg::correct(m);
    } else {
        m.push_back(polygon_from_wkt(wkt));
    }
    return m;
}

}  // namespace qps

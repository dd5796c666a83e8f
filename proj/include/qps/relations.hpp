#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qps/geometry.hpp"

namespace qps {

// The 11 interval-occlusion relations kept after fixing the viewing order.
// The sign encodes relative closeness of the first landmark: '+' in front.
enum class Ioc : uint8_t {
    p = 0,
    m,
    o_plus,
    o_minus,
    si_plus,
    si_minus,
    di_plus,
    di_minus,
    fi_plus,
    fi_minus,
    c_plus,
};

inline constexpr int kIocCount = 11;

inline const char* to_string(Ioc r) {
    static constexpr const char* names[kIocCount] = {
        "p", "m", "o+", "o-", "si+", "si-", "di+", "di-", "fi+", "fi-", "c+"};
    return names[static_cast<int>(r)];
}

inline std::optional<Ioc> ioc_from_string(const std::string& s) {
    for (int i = 0; i < kIocCount; ++i)
        if (s == to_string(static_cast<Ioc>(i))) return static_cast<Ioc>(i);
    return std::nullopt;
}

// Small set of relations as a bitmask.
struct IocSet {
    uint16_t bits = 0;

    static IocSet of(std::initializer_list<Ioc> rs) {
        IocSet s;
        for (Ioc r : rs) s.bits |= uint16_t(1u << static_cast<int>(r));
        return s;
    }
    bool contains(Ioc r) const { return bits & (1u << static_cast<int>(r)); }
    int size() const { return __builtin_popcount(bits); }
    std::vector<Ioc> to_vector() const {
        std::vector<Ioc> v;
        for (int i = 0; i < kIocCount; ++i)
            if (bits & (1u << i)) v.push_back(static_cast<Ioc>(i));
        return v;
    }
    bool operator==(const IocSet&) const = default;
};

// Projection of a landmark on the panorama line.  The vertical interval
// [h_lo, h_hi] feeds the tall-enough constraint of the starred relations.
struct ProjectedInterval {
    double x1 = 0.0;
    double x2 = 0.0;
    double depth = 1.0;
    double h_lo = 0.0;
    double h_hi = 1.0;

    ProjectedInterval() = default;
    ProjectedInterval(double x1_, double x2_, double depth_, double h_lo_ = 0.0,
                      double h_hi_ = 1.0)
        : x1(x1_), x2(x2_), depth(depth_), h_lo(h_lo_), h_hi(h_hi_) {
        if (x2 < x1) throw DataError("interval requires x1 <= x2");
        if (depth <= 0.0) throw DataError("interval depth must be positive");
    }
    double length() const { return x2 - x1; }
};

enum class Order { A_first, B_first };

// Rules 1-3: smaller left extreme, then longer, then nearer.
inline Order viewing_order(const ProjectedInterval& a, const ProjectedInterval& b) {
    if (a.x1 != b.x1) return a.x1 < b.x1 ? Order::A_first : Order::B_first;
    if (a.length() != b.length())
        return a.length() > b.length() ? Order::A_first : Order::B_first;
    if (a.depth != b.depth) return a.depth < b.depth ? Order::A_first : Order::B_first;
    throw DataError("identical intervals at identical depth are one landmark");
}

namespace detail {
// Allen relation of the two vertical intervals restricted to the cases that
// make the occluded landmark invisible: si_a, di_a, fi_a, eq_a.
inline bool hides_behind(const ProjectedInterval& front, const ProjectedInterval& behind) {
    bool starts_eq = front.h_lo == behind.h_lo;
    bool ends_eq = front.h_hi == behind.h_hi;
    if (starts_eq && ends_eq) return true;                               // eq
    if (starts_eq && front.h_hi > behind.h_hi) return true;              // si
    if (ends_eq && front.h_lo < behind.h_lo) return true;                // fi
    if (front.h_lo < behind.h_lo && front.h_hi > behind.h_hi) return true;  // di
    return false;
}
}  // namespace detail

// Relation of the ordered pair (a precedes b under viewing_order).  Returns
// nullopt when b is completely hidden behind a (starred constraint fails).
inline std::optional<Ioc> ioc_relation(const ProjectedInterval& a,
                                       const ProjectedInterval& b) {
    if (viewing_order(a, b) != Order::A_first)
        throw DataError("ioc_relation requires the pair in viewing order");
    bool front = a.depth < b.depth;
    bool starts_eq = a.x1 == b.x1;
    bool ends_eq = a.x2 == b.x2;
    if (a.x2 < b.x1) return Ioc::p;
    // coincident zero-width pairs are c+, not m
    if (a.x2 == b.x1 && !(starts_eq && ends_eq)) return Ioc::m;

    Ioc rel;
    if (starts_eq && ends_eq) {
        rel = Ioc::c_plus;  // rule 3 already put the front landmark first
    } else if (starts_eq) {
        rel = front ? Ioc::si_plus : Ioc::si_minus;
    } else if (ends_eq) {
        rel = front ? Ioc::fi_plus : Ioc::fi_minus;
    } else if (a.x2 < b.x2) {
        rel = front ? Ioc::o_plus : Ioc::o_minus;
    } else {
        rel = front ? Ioc::di_plus : Ioc::di_minus;
    }
    bool starred = rel == Ioc::si_plus || rel == Ioc::di_plus || rel == Ioc::fi_plus ||
                   rel == Ioc::c_plus;
    if (starred && detail::hides_behind(a, b)) return std::nullopt;
    return rel;
}

namespace detail {

using R = Ioc;
inline IocSet S(std::initializer_list<Ioc> rs) { return IocSet::of(rs); }

// 11x11 composition table.  Two cells of the published table, (di+, p) and
// (di+, m), omit the behind-signed outcomes their mirrored di- cells carry;
// the composition of di+ with a depth-free relation leaves the third depth
// unconstrained, so those cells are completed here to keep the table sound.
inline const std::array<std::array<IocSet, kIocCount>, kIocCount>& composition_table() {
    static const auto table = [] {
        std::array<std::array<IocSet, kIocCount>, kIocCount> t{};
        auto set = [&](R r1, R r2, IocSet s) {
            t[static_cast<int>(r1)][static_cast<int>(r2)] = s;
        };
        const IocSet all8 = S({R::p, R::m, R::o_plus, R::o_minus, R::di_plus,
                               R::di_minus, R::fi_plus, R::fi_minus});
        const IocSet ofd_both = S({R::o_plus, R::o_minus, R::di_plus, R::di_minus,
                                   R::fi_plus, R::fi_minus});
        const IocSet ofd_plus = S({R::o_plus, R::di_plus, R::fi_plus});
        const IocSet ofd_minus = S({R::o_minus, R::di_minus, R::fi_minus});

        for (int j = 0; j < kIocCount; ++j) set(R::p, static_cast<R>(j), S({R::p}));

        set(R::m, R::p, S({R::p}));
        set(R::m, R::m, S({R::p}));
        set(R::m, R::o_plus, S({R::p}));
        set(R::m, R::o_minus, S({R::p}));
        set(R::m, R::si_plus, S({R::m}));
        set(R::m, R::si_minus, S({R::m}));
        set(R::m, R::di_plus, S({R::p}));
        set(R::m, R::di_minus, S({R::p}));
        set(R::m, R::fi_plus, S({R::p}));
        set(R::m, R::fi_minus, S({R::p}));
        set(R::m, R::c_plus, S({R::m}));

        set(R::o_plus, R::p, S({R::p}));
        set(R::o_plus, R::m, S({R::p}));
        set(R::o_plus, R::o_plus, S({R::p, R::m, R::o_plus}));
        set(R::o_plus, R::o_minus, S({R::p, R::m, R::o_plus, R::o_minus}));
        set(R::o_plus, R::si_plus, ofd_plus);
        set(R::o_plus, R::si_minus, ofd_both);
        set(R::o_plus, R::di_plus,
            S({R::p, R::m, R::o_plus, R::di_plus, R::fi_plus}));
        set(R::o_plus, R::di_minus, all8);
        set(R::o_plus, R::fi_plus, S({R::p, R::m, R::o_plus}));
        set(R::o_plus, R::fi_minus, S({R::p, R::m, R::o_plus, R::o_minus}));
        set(R::o_plus, R::c_plus, S({R::o_plus}));

        set(R::o_minus, R::p, S({R::p}));
        set(R::o_minus, R::m, S({R::p}));
        set(R::o_minus, R::o_plus, S({R::p, R::m, R::o_plus, R::o_minus}));
        set(R::o_minus, R::o_minus, S({R::p, R::m, R::o_minus}));
        set(R::o_minus, R::si_plus, ofd_both);
        set(R::o_minus, R::si_minus, ofd_minus);
        set(R::o_minus, R::di_plus, all8);
        set(R::o_minus, R::di_minus,
            S({R::p, R::m, R::o_minus, R::di_minus, R::fi_minus}));
        set(R::o_minus, R::fi_plus, S({R::p, R::m, R::o_plus, R::o_minus}));
        set(R::o_minus, R::fi_minus, S({R::p, R::m, R::o_minus}));
        set(R::o_minus, R::c_plus, S({R::o_plus, R::o_minus}));

        set(R::si_plus, R::p, all8);
        set(R::si_plus, R::m, ofd_both);
        set(R::si_plus, R::o_plus, ofd_plus);
        set(R::si_plus, R::o_minus, ofd_both);
        set(R::si_plus, R::si_plus, S({R::si_plus}));
        set(R::si_plus, R::si_minus, S({R::si_plus, R::si_minus}));
        set(R::si_plus, R::di_plus, S({R::di_plus}));
        set(R::si_plus, R::di_minus, S({R::di_plus, R::di_minus}));
        set(R::si_plus, R::fi_plus, S({R::di_plus}));
        set(R::si_plus, R::fi_minus, S({R::di_plus, R::di_minus}));
        set(R::si_plus, R::c_plus, S({R::si_plus}));

        set(R::si_minus, R::p, all8);
        set(R::si_minus, R::m, ofd_both);
        set(R::si_minus, R::o_plus, ofd_both);
        set(R::si_minus, R::o_minus, ofd_minus);
        set(R::si_minus, R::si_plus, S({R::si_plus, R::si_minus}));
        set(R::si_minus, R::si_minus, S({R::si_minus}));
        set(R::si_minus, R::di_plus, S({R::di_plus, R::di_minus}));
        set(R::si_minus, R::di_minus, S({R::di_minus}));
        set(R::si_minus, R::fi_plus, S({R::di_plus, R::di_minus}));
        set(R::si_minus, R::fi_minus, S({R::di_minus}));
        set(R::si_minus, R::c_plus, S({R::si_plus, R::si_minus}));

        set(R::di_plus, R::p, all8);
        set(R::di_plus, R::m, ofd_both);
        set(R::di_plus, R::o_plus, ofd_plus);
        set(R::di_plus, R::o_minus, ofd_both);
        set(R::di_plus, R::si_plus, S({R::di_plus}));
        set(R::di_plus, R::si_minus, S({R::di_plus, R::di_minus}));
        set(R::di_plus, R::di_plus, S({R::di_plus}));
        set(R::di_plus, R::di_minus, S({R::di_plus, R::di_minus}));
        set(R::di_plus, R::fi_plus, S({R::di_plus}));
        set(R::di_plus, R::fi_minus, S({R::di_plus, R::di_minus}));
        set(R::di_plus, R::c_plus, S({R::di_plus}));

        set(R::di_minus, R::p, all8);
        set(R::di_minus, R::m, ofd_both);
        set(R::di_minus, R::o_plus, ofd_both);
        set(R::di_minus, R::o_minus, ofd_minus);
        set(R::di_minus, R::si_plus, S({R::di_plus, R::di_minus}));
        set(R::di_minus, R::si_minus, S({R::di_minus}));
        set(R::di_minus, R::di_plus, S({R::di_plus, R::di_minus}));
        set(R::di_minus, R::di_minus, S({R::di_minus}));
        set(R::di_minus, R::fi_plus, S({R::di_plus, R::di_minus}));
        set(R::di_minus, R::fi_minus, S({R::di_minus}));
        set(R::di_minus, R::c_plus, S({R::di_plus, R::di_minus}));

        set(R::fi_plus, R::p, S({R::p}));
        set(R::fi_plus, R::m, S({R::m}));
        set(R::fi_plus, R::o_plus, S({R::o_plus}));
        set(R::fi_plus, R::o_minus, S({R::o_plus, R::o_minus}));
        set(R::fi_plus, R::si_plus, S({R::di_plus}));
        set(R::fi_plus, R::si_minus, S({R::di_plus, R::di_minus}));
        set(R::fi_plus, R::di_plus, S({R::di_plus}));
        set(R::fi_plus, R::di_minus, S({R::di_plus, R::di_minus}));
        set(R::fi_plus, R::fi_plus, S({R::fi_plus}));
        set(R::fi_plus, R::fi_minus, S({R::fi_plus, R::fi_minus}));
        set(R::fi_plus, R::c_plus, S({R::fi_plus}));

        set(R::fi_minus, R::p, S({R::p}));
        set(R::fi_minus, R::m, S({R::m}));
        set(R::fi_minus, R::o_plus, S({R::o_plus, R::o_minus}));
        set(R::fi_minus, R::o_minus, S({R::o_minus}));
        set(R::fi_minus, R::si_plus, S({R::di_plus, R::di_minus}));
        set(R::fi_minus, R::si_minus, S({R::di_minus}));
        set(R::fi_minus, R::di_plus, S({R::di_plus, R::di_minus}));
        set(R::fi_minus, R::di_minus, S({R::di_minus}));
        set(R::fi_minus, R::fi_plus, S({R::fi_plus, R::fi_minus}));
        set(R::fi_minus, R::fi_minus, S({R::fi_minus}));
        set(R::fi_minus, R::c_plus, S({R::fi_plus, R::fi_minus}));

        set(R::c_plus, R::p, S({R::p}));
        set(R::c_plus, R::m, S({R::m}));
        set(R::c_plus, R::o_plus, S({R::o_plus}));
        set(R::c_plus, R::o_minus, S({R::o_plus, R::o_minus}));
        set(R::c_plus, R::si_plus, S({R::si_plus}));
        set(R::c_plus, R::si_minus, S({R::si_plus, R::si_minus}));
        set(R::c_plus, R::di_plus, S({R::di_plus}));
        set(R::c_plus, R::di_minus, S({R::di_plus, R::di_minus}));
        set(R::c_plus, R::fi_plus, S({R::fi_plus}));
        set(R::c_plus, R::fi_minus, S({R::fi_plus, R::fi_minus}));
        set(R::c_plus, R::c_plus, S({R::c_plus}));
        return t;
    }();
    return table;
}

// Conceptual neighbourhood: relations directly reachable under continuous
// viewer motion.  p-m, m-o(+/-), the o-fi-di and o-si-di chains with the
// role-swap sign flips, the equal-depth twins, and the c+ hub.
inline const std::array<std::array<bool, kIocCount>, kIocCount>& neighbour_table() {
    static const auto table = [] {
        std::array<std::array<bool, kIocCount>, kIocCount> t{};
        auto add = [&](R a, R b) {
            t[static_cast<int>(a)][static_cast<int>(b)] = true;
            t[static_cast<int>(b)][static_cast<int>(a)] = true;
        };
        add(R::p, R::m);
        add(R::m, R::o_plus);
        add(R::m, R::o_minus);
        add(R::o_plus, R::fi_plus);
        add(R::fi_plus, R::di_plus);
        add(R::o_minus, R::fi_minus);
        add(R::fi_minus, R::di_minus);
        add(R::o_plus, R::si_minus);
        add(R::si_minus, R::di_minus);
        add(R::o_minus, R::si_plus);
        add(R::si_plus, R::di_plus);
        add(R::o_plus, R::o_minus);
        add(R::di_plus, R::di_minus);
        add(R::si_plus, R::si_minus);
        add(R::fi_plus, R::fi_minus);
        add(R::c_plus, R::si_plus);
        add(R::c_plus, R::si_minus);
        add(R::c_plus, R::fi_plus);
        add(R::c_plus, R::fi_minus);
        return t;
    }();
    return table;
}

}  // namespace detail

inline IocSet compose(Ioc r1, Ioc r2) {
    return detail::composition_table()[static_cast<int>(r1)][static_cast<int>(r2)];
}

inline bool are_neighbours(Ioc r1, Ioc r2) {
    return detail::neighbour_table()[static_cast<int>(r1)][static_cast<int>(r2)];
}

// --- relative orientation ------------------------------------------------

// Index of the viewer w.r.t. the two perpendiculars of line AB (A observed
// first).  Regions: 1 before A's perpendicular, 3 between, 5 past B's.
// Line and point cases: 2/4 on the perpendiculars, 6/8 collinear outside
// the segment, 7 at B.
inline int relative_orientation(Vec2 viewer, Vec2 a, Vec2 b, double eps = kEps) {
    if (a == b) throw DataError("relative_orientation requires distinct landmarks");
    if (viewer == a || viewer == b)
        throw DataError("viewer coincides with a landmark");
    Vec2 u = b - a;
    double len = u.norm();
    Vec2 d = u / len;
    double s = (viewer - a).dot(d);           // position along AB, 0 at A, len at B
    double off = std::fabs((viewer - a).cross(d));  // distance from line AB

    if (distance(viewer, b) <= eps) return 7;
    if (off <= eps) {
        if (s < -eps) return 6;
        if (s > len + eps) return 8;
        // collinear inside the segment has no index of its own; fall through
        // to the slab classification below.
    }
    if (std::fabs(s) <= eps) return 2;
    if (std::fabs(s - len) <= eps) return 4;
    if (s < 0.0) return 1;
    if (s > len) return 5;
    return 3;
}

// Mirror of an orientation index when the pair order is reversed.
inline int mirror_orientation(int idx) {
    switch (idx) {
        case 1: return 5;
        case 5: return 1;
        case 2: return 4;
        case 4: return 2;
        case 6: return 8;
        case 8: return 6;
        default: return idx;
    }
}

enum class QualAngle : uint8_t { acute = 0, right = 2, obtuse = 1 };

inline char to_digit(QualAngle q) { return q == QualAngle::obtuse ? '1' : '0'; }

// Classifies the angle at the viewer between the two lines of sight against
// 90 degrees; a dead-band of eps_angle_deg maps to `right`.
inline QualAngle qualitative_angle(Vec2 viewer, Vec2 a, Vec2 b,
                                   double eps_angle_deg = kEpsAngleDeg) {
    if (viewer == a || viewer == b)
        throw DataError("viewer coincides with a landmark");
    double theta = angle_at_deg(viewer, a, b);
    if (std::fabs(theta - 90.0) <= eps_angle_deg) return QualAngle::right;
    return theta < 90.0 ? QualAngle::acute : QualAngle::obtuse;
}

// 1 iff the clockwise angular span from the first to the last landmark,
// following the given order, strictly exceeds 180 degrees.
inline int enclosed_flag(Vec2 viewer, const std::vector<Vec2>& ordered) {
    if (ordered.empty()) throw DataError("enclosed_flag requires landmarks");
    if (ordered.size() == 1) return 0;
    double span = 0.0;
    for (size_t i = 0; i + 1 < ordered.size(); ++i) {
        double d = bearing_deg(viewer, ordered[i + 1]) - bearing_deg(viewer, ordered[i]);
        if (d < 0.0) d += 360.0;
        span += d;
    }
    return span > 180.0 ? 1 : 0;
}

}  // namespace qps

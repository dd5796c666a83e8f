#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "qps/landmark.hpp"

namespace qps {

using Mat2 = std::array<std::array<double, 2>, 2>;

// --- perception-error likelihoods (per-relation Gaussians) ------------------

struct PerceptionParams {
    double sigma1 = 1.0;   // meters, distance to the connecting line
    double sigma2 = 1.0;   // meters, distance to the nearest perpendicular
    double sigma3 = 10.0;  // degrees, deviation of the angle from 90
    std::array<double, 3> w2 = {0.6, 0.3, 0.1};
    std::map<char, double> d_max;  // per-type visibility range
    double w_cap = 10.0;           // cap for the inverse-density weights
};

inline double gauss1d(double dev, double sigma) {
    return std::exp(-0.5 * (dev / sigma) * (dev / sigma)) / (sigma * std::sqrt(2.0 * M_PI));
}

struct PerceptionLikelihoods {
    double f1 = 0.0;  // ordering (straight line)
    double f2 = 0.0;  // orientation (nearest perpendicular)
    double f3 = 0.0;  // qualitative angle (deviation from 90 degrees)
};

inline PerceptionLikelihoods perception_likelihoods(Vec2 o, Vec2 a, Vec2 b,
                                                    const PerceptionParams& pp) {
    if (o == a || o == b) throw DataError("viewer coincides with a landmark");
    Vec2 d = (b - a).normalized();
    double dist_sl = std::fabs((o - a).cross(d));
    double along_a = (o - a).dot(d);
    double along_b = (o - b).dot(d);
    double dist_pl = std::min(std::fabs(along_a), std::fabs(along_b));
    double ang = angle_at_deg(o, a, b);
    PerceptionLikelihoods f;
    f.f1 = gauss1d(dist_sl, pp.sigma1);
    f.f2 = gauss1d(dist_pl, pp.sigma2);
    f.f3 = gauss1d(std::fabs(90.0 - ang), pp.sigma3);
    return f;
}

// Weight of a relation change cost, inversely proportional to the error
// likelihood: 1 at the reference density (one sigma from the peak), capped
// from above.  The most uncertain relations are the cheapest to change.
inline double relation_weight(double f, double sigma, double w_cap = 10.0) {
    if (f < 0.0) throw DataError("density must be non-negative");
    double f_ref = gauss1d(sigma, sigma);
    if (f <= f_ref / w_cap) return w_cap;
    return f_ref / f;
}

// Eq-B.1 substitution cost over the levelled landmark semantics.
inline double substitution_cost(const TypeTriple& observed, const TypeTriple& reference,
                                const PerceptionParams& pp) {
    auto differs = [](const std::string& x, const std::string& y) {
        if (x.empty() && y.empty()) return false;
        return x != y;
    };
    return pp.w2[0] * (differs(observed.type, reference.type) ? 1.0 : 0.0) +
           pp.w2[1] * (differs(observed.sub_type, reference.sub_type) ? 1.0 : 0.0) +
           pp.w2[2] * (differs(observed.name, reference.name) ? 1.0 : 0.0);
}

// w3: closeness of the landmark to the viewer, (Dmax - D)/Dmax in [0,1].
inline double closeness_weight(double dist, double d_max) {
    if (d_max <= 0.0) throw DataError("d_max must be positive");
    return std::max(0.0, (d_max - dist) / d_max);
}

// --- landmark-location uncertainty propagation (first-order) ----------------

using Mat4 = std::array<std::array<double, 4>, 4>;

// Covariance of the straight-line parameters (a, b, a', b') of Y = aX + b
// and X = a'Y + b'.  For a horizontal line only the (a, b) block exists;
// for a vertical line only (a', b').
struct LineUncertainty {
    Mat4 cov{};
    bool horizontal = false;  // a == 0, the (a', b') form does not exist
    bool vertical = false;    // a' == 0, the (a, b) form does not exist
    double a = 0.0, b = 0.0, a_prime = 0.0, b_prime = 0.0;

    Mat2 ab_block() const { return {{{cov[0][0], cov[0][1]}, {cov[1][0], cov[1][1]}}}; }
    Mat2 ab_prime_block() const {
        return {{{cov[2][2], cov[2][3]}, {cov[3][2], cov[3][3]}}};
    }
};

namespace detail {

inline Mat2 propagate4(const std::array<std::array<double, 4>, 2>& J,
                       const std::array<double, 4>& var) {
    Mat2 out{};
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k) s += J[r][k] * var[k] * J[c][k];
            out[r][c] = s;
        }
    return out;
}

inline std::array<double, 4> sigma_diag(const Landmark& A, const Landmark& B) {
    return {A.sigma_x * A.sigma_x, A.sigma_y * A.sigma_y, B.sigma_x * B.sigma_x,
            B.sigma_y * B.sigma_y};
}

}  // namespace detail

// Rows of the J0 Jacobian for (a, b) w.r.t. (x1, y1, x2, y2).
inline std::array<std::array<double, 4>, 2> jacobian_sl_ab(Vec2 A, Vec2 B) {
    double dx = B.x - A.x, dy = B.y - A.y;
    return {{{dy / (dx * dx), -1.0 / dx, -dy / (dx * dx), 1.0 / dx},
             {B.x * (-dy) / (dx * dx), B.x / dx, A.x * dy / (dx * dx), -A.x / dx}}};
}

// Rows of J0 for (a', b') w.r.t. (x1, y1, x2, y2).
inline std::array<std::array<double, 4>, 2> jacobian_sl_ab_prime(Vec2 A, Vec2 B) {
    double dx = B.x - A.x, dy = B.y - A.y;
    return {{{-1.0 / dy, dx / (dy * dy), 1.0 / dy, -dx / (dy * dy)},
             {B.y / dy, B.y * (-dx) / (dy * dy), -A.y / dy, A.y * dx / (dy * dy)}}};
}

// Full J0 (4x4) over (a, b, a', b'); rows for a missing parameterization
// are zero.
inline LineUncertainty propagate_to_line(const Landmark& A, const Landmark& B) {
    if (A.centre == B.centre) throw DataError("coincident landmarks");
    double dx = B.centre.x - A.centre.x, dy = B.centre.y - A.centre.y;
    auto var = detail::sigma_diag(A, B);
    LineUncertainty lu;
    lu.horizontal = dy == 0.0;
    lu.vertical = dx == 0.0;
    std::array<std::array<double, 4>, 4> J{};
    if (!lu.vertical) {
        lu.a = dy / dx;
        lu.b = (B.centre.x * A.centre.y - A.centre.x * B.centre.y) / dx;
        auto Jab = jacobian_sl_ab(A.centre, B.centre);
        J[0] = Jab[0];
        J[1] = Jab[1];
    }
    if (!lu.horizontal) {
        lu.a_prime = dx / dy;
        lu.b_prime = (A.centre.x * B.centre.y - B.centre.x * A.centre.y) / dy;
        auto Jap = jacobian_sl_ab_prime(A.centre, B.centre);
        J[2] = Jap[0];
        J[3] = Jap[1];
    }
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k) s += J[r][k] * var[k] * J[c][k];
            lu.cov[r][c] = s;
        }
    return lu;
}

// Covariance of the point (X, Y) on the line via J0^2 = [[0,0,Y,1],[X,1,0,0]]
// applied to the (a, b, a', b') covariance: sigma_Y^2 from the (a, b) block,
// sigma_X^2 from (a', b'), and the cross term from the off-diagonal blocks.
// Degenerate lines pin the missing axis to zero.
struct PointVariance {
    double var_x = 0.0;
    double var_y = 0.0;
    double cov_xy = 0.0;
};

inline PointVariance point_on_line_variance(const LineUncertainty& lu, double X, double Y) {
    PointVariance pv;
    const Mat4& m = lu.cov;
    if (!lu.vertical) pv.var_y = m[0][0] * X * X + m[1][1] + 2.0 * m[0][1] * X;
    if (!lu.horizontal) pv.var_x = m[2][2] * Y * Y + m[3][3] + 2.0 * m[2][3] * Y;
    if (!lu.vertical && !lu.horizontal)
        pv.cov_xy = Y * X * m[2][0] + Y * m[2][1] + X * m[3][0] + m[3][1];
    return pv;
}

namespace detail {

// Density of `o` around mean mu with per-axis variances and covariance.
// Indefinite covariances drop the interaction term; a vanishing axis
// collapses the density to the other axis (degenerate lines).
inline double gaussian_density_2d(Vec2 o, Vec2 mu, double var_x, double var_y, double cov) {
    constexpr double tiny = 1e-12;
    double dx = o.x - mu.x, dy = o.y - mu.y;
    if (var_x <= tiny && var_y <= tiny)
        return (std::fabs(dx) <= kEps && std::fabs(dy) <= kEps)
                   ? std::numeric_limits<double>::infinity()
                   : 0.0;
    if (var_x <= tiny) return gauss1d(dy, std::sqrt(var_y));
    if (var_y <= tiny) return gauss1d(dx, std::sqrt(var_x));
    double det = var_x * var_y - cov * cov;
    if (det <= 0.0) {  // indefinite: neglect the interaction terms
        cov = 0.0;
        det = var_x * var_y;
    }
    double q = (dx * dx * var_y - 2.0 * dx * dy * cov + dy * dy * var_x) / det;
    return std::exp(-0.5 * q) / (2.0 * M_PI * std::sqrt(det));
}

}  // namespace detail

// fl1: likelihood of observing an inconsistent ordering, the density of the
// viewer at its nearest point on the connecting line.
inline double prob_inconsistent_order(Vec2 o, const Landmark& A, const Landmark& B) {
    LineUncertainty lu = propagate_to_line(A, B);
    Vec2 dvec = (B.centre - A.centre).normalized();
    double s = (o - A.centre).dot(dvec);
    Vec2 nearest = A.centre + dvec * s;
    PointVariance pv = point_on_line_variance(lu, nearest.x, nearest.y);
    return detail::gaussian_density_2d(o, nearest, pv.var_x, pv.var_y, pv.cov_xy);
}

// Perpendicular-line parameters (a1, b1, b2) and (a'1, b'1, b'2) with their
// covariances, per the J1 Jacobian.
struct PerpendicularUncertainty {
    bool horizontal = false;  // perpendiculars horizontal (pair vertical)
    bool vertical = false;    // perpendiculars vertical (pair horizontal)
    double a1 = 0.0, b1 = 0.0, b2 = 0.0;
    double a1p = 0.0, b1p = 0.0, b2p = 0.0;
    std::array<std::array<double, 3>, 3> cov_ab{};   // over (a1, b1, b2)
    std::array<std::array<double, 3>, 3> cov_abp{};  // over (a'1, b'1, b'2)
};

inline std::array<std::array<double, 4>, 3> jacobian_pl_upper(Vec2 A, Vec2 B) {
    double dY = B.y - A.y;
    double x1 = A.x, x2 = B.x;
    return {{{1.0 / dY, (x1 - x2) / (dY * dY), -1.0 / dY, (x2 - x1) / (dY * dY)},
             {(-2.0 * x1 + x2) / dY, 1.0 - x1 * (x1 - x2) / (dY * dY), x1 / dY,
              x1 * (x1 - x2) / (dY * dY)},
             {-x2 / dY, -x2 * (x1 - x2) / (dY * dY), (2.0 * x2 - x1) / dY,
              1.0 + x2 * (x1 - x2) / (dY * dY)}}};
}

inline std::array<std::array<double, 4>, 3> jacobian_pl_lower(Vec2 A, Vec2 B) {
    double dX = B.x - A.x;
    double y1 = A.y, y2 = B.y;
    return {{{(y1 - y2) / (dX * dX), 1.0 / dX, (y2 - y1) / (dX * dX), -1.0 / dX},
             {1.0 - y1 * (y1 - y2) / (dX * dX), (-2.0 * y1 + y2) / dX,
              y1 * (y1 - y2) / (dX * dX), y1 / dX},
             {-y2 * (y1 - y2) / (dX * dX), -y2 / dX, 1.0 + y2 * (y1 - y2) / (dX * dX),
              (2.0 * y2 - y1) / dX}}};
}

namespace detail {

inline std::array<std::array<double, 3>, 3> propagate3(
    const std::array<std::array<double, 4>, 3>& J, const std::array<double, 4>& var) {
    std::array<std::array<double, 3>, 3> out{};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k) s += J[r][k] * var[k] * J[c][k];
            out[r][c] = s;
        }
    return out;
}

}  // namespace detail

inline PerpendicularUncertainty propagate_to_perpendiculars(const Landmark& A,
                                                            const Landmark& B) {
    if (A.centre == B.centre) throw DataError("coincident landmarks");
    double dX = B.centre.x - A.centre.x, dY = B.centre.y - A.centre.y;
    auto var = detail::sigma_diag(A, B);
    PerpendicularUncertainty pu;
    pu.horizontal = dX == 0.0;  // pair vertical -> perpendiculars horizontal
    pu.vertical = dY == 0.0;    // pair horizontal -> perpendiculars vertical
    if (dY != 0.0) {
        pu.a1 = (A.centre.x - B.centre.x) / dY;
        pu.b1 = A.centre.y - pu.a1 * A.centre.x;
        pu.b2 = B.centre.y - pu.a1 * B.centre.x;
        pu.cov_ab = detail::propagate3(jacobian_pl_upper(A.centre, B.centre), var);
    }
    if (dX != 0.0) {
        pu.a1p = (A.centre.y - B.centre.y) / dX;
        pu.b1p = A.centre.x - pu.a1p * A.centre.y;
        pu.b2p = B.centre.x - pu.a1p * B.centre.y;
        pu.cov_abp = detail::propagate3(jacobian_pl_lower(A.centre, B.centre), var);
    }
    return pu;
}

// fl2: densities of the viewer at its nearest point on each of the two
// perpendicular lines; the larger one is the orientation-inconsistency
// likelihood.
inline std::pair<double, double> prob_inconsistent_orientation(Vec2 o, const Landmark& A,
                                                               const Landmark& B) {
    PerpendicularUncertainty pu = propagate_to_perpendiculars(A, B);
    std::array<double, 2> out{};
    for (int i = 0; i < 2; ++i) {
        Vec2 through = i == 0 ? A.centre : B.centre;
        Vec2 dir = (B.centre - A.centre).normalized().perp();
        double s = (o - through).dot(dir);
        Vec2 nearest = through + dir * s;
        double var_x = 0.0, var_y = 0.0;
        if (!pu.vertical) {
            const auto& m = pu.cov_ab;
            int bi = 1 + i;
            var_y = m[0][0] * nearest.x * nearest.x + m[bi][bi] + 2.0 * m[0][bi] * nearest.x;
        }
        if (!pu.horizontal) {
            const auto& m = pu.cov_abp;
            int bi = 1 + i;
            var_x = m[0][0] * nearest.y * nearest.y + m[bi][bi] + 2.0 * m[0][bi] * nearest.y;
        }
        out[static_cast<size_t>(i)] = detail::gaussian_density_2d(o, nearest, var_x, var_y, 0.0);
    }
    return {out[0], out[1]};
}

// Circle parameterization of the half-circle with diameter AB:
// P(phi) = A + ((x2-x1)cos^2 + (y2-y1)sin cos, (y2-y1)cos^2 - (x2-x1)sin cos).
inline Vec2 circle_point(Vec2 A, Vec2 B, double phi) {
    double c = std::cos(phi), s = std::sin(phi);
    double dx = B.x - A.x, dy = B.y - A.y;
    return {A.x + dx * c * c + dy * s * c, A.y + dy * c * c - dx * s * c};
}

inline std::array<std::array<double, 4>, 2> jacobian_circle(double phi) {
    double c = std::cos(phi), s = std::sin(phi);
    return {{{-c * c, -s * c, c * c, s * c}, {s * c, -c * c, -s * c, c * c}}};
}

// fl3: density of the viewer at its nearest point on the diameter circle.
inline double prob_inconsistent_angle(Vec2 o, const Landmark& A, const Landmark& B) {
    if (A.centre == B.centre) throw DataError("coincident landmarks");
    Vec2 c = (A.centre + B.centre) / 2.0;
    Vec2 v1 = B.centre - c, v2 = o - c;
    if (v2.norm() <= kEps) throw DataError("viewer at the circle centre");
    double theta = -std::atan2(v1.cross(v2), v1.dot(v2));
    double phi = theta / 2.0;
    Vec2 nearest = circle_point(A.centre, B.centre, phi);
    Mat2 cov = detail::propagate4(jacobian_circle(phi), detail::sigma_diag(A, B));
    return detail::gaussian_density_2d(o, nearest, cov[0][0], cov[1][1], cov[0][1]);
}

// fl4: density of the viewer at the nearest point of the circular zone
// boundary; the boundary inherits the centre uncertainty unchanged.
inline double prob_missed_at_boundary(Vec2 o, const Landmark& lm) {
    Vec2 d = o - lm.centre;
    double dist = d.norm();
    if (dist <= kEps) throw DataError("viewer at the landmark centre");
    Vec2 nearest = lm.centre + d * (lm.max_range / dist);
    return detail::gaussian_density_2d(o, nearest, lm.sigma_x * lm.sigma_x,
                                       lm.sigma_y * lm.sigma_y, 0.0);
}

}  // namespace qps

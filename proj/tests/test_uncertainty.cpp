#include <catch2/catch_amalgamated.hpp>

#include "qps/minhash.hpp"
#include "qps/uncertainty.hpp"

using namespace qps;

namespace {

Landmark lm_at(Vec2 p, double sx, double sy) {
    Landmark l;
    l.centre = p;
    l.sigma_x = sx;
    l.sigma_y = sy;
    l.max_range = 30.0;
    l.type_id = 'G';
    return l;
}

// central finite differences of a 4-parameter map
template <typename F>
std::vector<std::vector<double>> fd_jacobian(F f, std::array<double, 4> x, double h = 1e-6) {
    auto y0 = f(x);
    std::vector<std::vector<double>> J(y0.size(), std::vector<double>(4));
    for (int k = 0; k < 4; ++k) {
        auto xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        auto yp = f(xp), ym = f(xm);
        for (size_t r = 0; r < y0.size(); ++r) J[r][k] = (yp[r] - ym[r]) / (2.0 * h);
    }
    return J;
}

double rel_err(double got, double want) {
    return std::fabs(got - want) / std::max(1.0, std::fabs(want));
}

// Jacobi eigenvalue iteration for small symmetric matrices
std::vector<double> sym_eigenvalues(std::vector<std::vector<double>> m) {
    size_t n = m.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j) off += m[i][j] * m[i][j];
        if (off < 1e-24) break;
        for (size_t p = 0; p < n; ++p)
            for (size_t q = p + 1; q < n; ++q) {
                if (std::fabs(m[p][q]) < 1e-30) continue;
                double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (size_t k = 0; k < n; ++k) {
                    double mkp = m[k][p], mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for (size_t k = 0; k < n; ++k) {
                    double mpk = m[p][k], mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (size_t i = 0; i < n; ++i) ev[i] = m[i][i];
    return ev;
}

}  // namespace

TEST_CASE("perception likelihood peaks and formula agreement") {
    PerceptionParams pp;
    Vec2 A{0, 0}, B{10, 0};
    auto on_line = perception_likelihoods(Vec2{4, 1e-12}, A, B, pp);
    CHECK(on_line.f1 == Catch::Approx(1.0 / (pp.sigma1 * std::sqrt(2 * M_PI))).margin(1e-9));
    // right angle peak: viewer on the Thales circle
    auto right = perception_likelihoods({5, 5}, A, B, pp);
    CHECK(right.f3 == Catch::Approx(1.0 / (pp.sigma3 * std::sqrt(2 * M_PI))).margin(1e-9));

    SplitMix64 rng(31);
    for (int t = 0; t < 200; ++t) {
        Vec2 o{rng.next_unit() * 20 - 5, rng.next_unit() * 20 - 10};
        if (distance(o, A) < 0.1 || distance(o, B) < 0.1) continue;
        auto f = perception_likelihoods(o, A, B, pp);
        double d1 = std::fabs(o.y);
        double d2 = std::min(std::fabs(o.x), std::fabs(o.x - 10.0));
        double ang = angle_at_deg(o, A, B);
        CHECK(rel_err(f.f1, gauss1d(d1, pp.sigma1)) < 1e-12);
        CHECK(rel_err(f.f2, gauss1d(d2, pp.sigma2)) < 1e-12);
        CHECK(rel_err(f.f3, gauss1d(std::fabs(90 - ang), pp.sigma3)) < 1e-12);
    }
}

TEST_CASE("relation weight is capped, normalized and monotone") {
    double sigma = 1.0;
    double f_peak = gauss1d(0.0, sigma);
    double f_ref = gauss1d(sigma, sigma);
    CHECK(relation_weight(f_peak, sigma) < 1.0);
    CHECK(relation_weight(f_ref, sigma) == Catch::Approx(1.0));
    CHECK(relation_weight(0.0, sigma) == 10.0);
    double prev = relation_weight(1e-9, sigma);
    for (double f = 1e-6; f <= f_peak; f *= 3.0) {
        double w = relation_weight(f, sigma);
        CHECK(w <= prev + 1e-12);
        prev = w;
    }
}

TEST_CASE("substitution cost over semantic levels") {
    PerceptionParams pp;
    TypeTriple ref{"T", "ST", "N"};
    CHECK(substitution_cost({"T2", "ST2", "N2"}, ref, pp) == Catch::Approx(1.0));
    CHECK(substitution_cost({"T", "ST", "N2"}, ref, pp) == Catch::Approx(0.1));
    CHECK(substitution_cost({"T", "ST", "N"}, ref, pp) == 0.0);
    CHECK(substitution_cost({"T2", "ST", "N"}, ref, pp) == Catch::Approx(0.6));
    CHECK(substitution_cost({"T", "ST2", "N"}, ref, pp) == Catch::Approx(0.3));
}

TEST_CASE("straight-line covariance matches the worked example") {
    auto A = lm_at({0, 0}, 0.2, 0.5);
    auto B = lm_at({5, 0}, 0.3, 0.8);
    auto lu = propagate_to_line(A, B);
    CHECK(lu.horizontal);
    CHECK_FALSE(lu.vertical);
    auto ab = lu.ab_block();
    CHECK(std::fabs(ab[0][0] - 0.0356) < 5e-4);
    CHECK(std::fabs(ab[0][1] - (-0.050)) < 5e-4);
    CHECK(std::fabs(ab[1][0] - (-0.050)) < 5e-4);
    CHECK(std::fabs(ab[1][1] - 0.2500) < 5e-4);

    auto zero = propagate_to_line(lm_at({0, 0}, 0, 0), lm_at({5, 0}, 0, 0));
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) CHECK(zero.cov[r][c] == 0.0);

    CHECK_THROWS_AS(propagate_to_line(A, A), DataError);
}

TEST_CASE("J0 agrees with finite differences") {
    SplitMix64 rng(41);
    for (int t = 0; t < 300; ++t) {
        std::array<double, 4> x{rng.next_unit() * 10 - 5, rng.next_unit() * 10 - 5,
                                rng.next_unit() * 10 - 5, rng.next_unit() * 10 - 5};
        if (std::fabs(x[2] - x[0]) < 0.2 || std::fabs(x[3] - x[1]) < 0.2) continue;
        auto Jab = jacobian_sl_ab({x[0], x[1]}, {x[2], x[3]});
        auto Jap = jacobian_sl_ab_prime({x[0], x[1]}, {x[2], x[3]});
        auto fd = fd_jacobian(
            [](std::array<double, 4> p) {
                double dx = p[2] - p[0], dy = p[3] - p[1];
                return std::vector<double>{dy / dx, (p[2] * p[1] - p[0] * p[3]) / dx,
                                           dx / dy, (p[0] * p[3] - p[2] * p[1]) / dy};
            },
            x);
        for (int k = 0; k < 4; ++k) {
            CHECK(rel_err(Jab[0][k], fd[0][k]) < 1e-4);
            CHECK(rel_err(Jab[1][k], fd[1][k]) < 1e-4);
            CHECK(rel_err(Jap[0][k], fd[2][k]) < 1e-4);
            CHECK(rel_err(Jap[1][k], fd[3][k]) < 1e-4);
        }
    }
}

TEST_CASE("point-on-line variance expansion and matrix form agree") {
    auto A = lm_at({0, 0}, 0.2, 0.5);
    auto B = lm_at({5, 0}, 0.3, 0.8);
    auto lu = propagate_to_line(A, B);
    auto pv0 = point_on_line_variance(lu, 0.0, 0.0);
    CHECK(pv0.var_y == Catch::Approx(lu.cov[1][1]).margin(1e-12));  // sigma_b^2 at X=0

    // generic line: full matrix-form oracle J^2 Sigma J^2T
    auto A2 = lm_at({0.3, -0.7}, 0.25, 0.4);
    auto B2 = lm_at({4.1, 3.3}, 0.35, 0.15);
    auto lu2 = propagate_to_line(A2, B2);
    SplitMix64 rng(4);
    for (int t = 0; t < 50; ++t) {
        double X = rng.next_unit() * 8.0 - 2.0;
        double Y = lu2.a * X + lu2.b;
        auto pv = point_on_line_variance(lu2, X, Y);
        double row1[4] = {0, 0, Y, 1};
        double row2[4] = {X, 1, 0, 0};
        double sxx = 0, syy = 0, sxy = 0;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) {
                sxx += row1[r] * lu2.cov[r][c] * row1[c];
                syy += row2[r] * lu2.cov[r][c] * row2[c];
                sxy += row1[r] * lu2.cov[r][c] * row2[c];
            }
        CHECK(rel_err(pv.var_x, sxx) < 1e-10);
        CHECK(rel_err(pv.var_y, syy) < 1e-10);
        CHECK(rel_err(pv.cov_xy, sxy) < 1e-10);
    }

    auto zero = propagate_to_line(lm_at({0, 0}, 0, 0), lm_at({3, 1}, 0, 0));
    auto pvz = point_on_line_variance(zero, 1.0, 1.0);
    CHECK(pvz.var_x == 0.0);
    CHECK(pvz.var_y == 0.0);
}

TEST_CASE("ordering inconsistency matches the published example") {
    auto A = lm_at({0, 0}, 0.2, 0.5);
    auto B = lm_at({5, 0}, 0.3, 0.8);
    CHECK(std::fabs(prob_inconsistent_order({0.5, -0.2}, A, B) - 0.793) < 0.02);
    CHECK(std::fabs(prob_inconsistent_order({3.0, -0.8}, A, B) - 0.235) < 0.02);
    CHECK(prob_inconsistent_order({2.5, -10.0}, A, B) < 1e-4);  // far tail
}

TEST_CASE("fl1 is maximized on the line along perpendicular transects") {
    auto A = lm_at({0.5, -0.3}, 0.3, 0.4);
    auto B = lm_at({4.2, 2.9}, 0.2, 0.6);
    Vec2 d = (B.centre - A.centre).normalized();
    Vec2 n = d.perp();
    for (double s : {0.2, 0.5, 0.8}) {
        Vec2 base = A.centre + d * (s * distance(A.centre, B.centre));
        double peak = prob_inconsistent_order(base + n * 1e-9, A, B);
        for (double off : {0.3, 0.8, 1.5, -0.4, -1.2}) {
            CHECK(prob_inconsistent_order(base + n * off, A, B) <= peak + 1e-9);
        }
    }
}

TEST_CASE("closer landmarks make the line sharply more uncertain") {
    double prev = 0.0;
    for (double gap : {4.0, 2.0, 1.0, 0.5}) {
        auto A = lm_at({0, 0}, 0.2, 0.5);
        auto B = lm_at({gap, 0}, 0.3, 0.8);
        auto lu = propagate_to_line(A, B);
        double var_a = lu.ab_block()[0][0];
        CHECK(var_a > prev);
        prev = var_a;
    }
}

TEST_CASE("J1 agrees with finite differences") {
    SplitMix64 rng(43);
    for (int t = 0; t < 300; ++t) {
        std::array<double, 4> x{rng.next_unit() * 10 - 5, rng.next_unit() * 10 - 5,
                                rng.next_unit() * 10 - 5, rng.next_unit() * 10 - 5};
        if (std::fabs(x[2] - x[0]) < 0.2 || std::fabs(x[3] - x[1]) < 0.2) continue;
        auto Ju = jacobian_pl_upper({x[0], x[1]}, {x[2], x[3]});
        auto Jl = jacobian_pl_lower({x[0], x[1]}, {x[2], x[3]});
        auto fd = fd_jacobian(
            [](std::array<double, 4> p) {
                double a1 = (p[0] - p[2]) / (p[3] - p[1]);
                double a1p = (p[1] - p[3]) / (p[2] - p[0]);
                return std::vector<double>{a1,
                                           p[1] - a1 * p[0],
                                           p[3] - a1 * p[2],
                                           a1p,
                                           p[0] - a1p * p[1],
                                           p[2] - a1p * p[3]};
            },
            x);
        for (int k = 0; k < 4; ++k)
            for (int r = 0; r < 3; ++r) {
                CHECK(rel_err(Ju[r][k], fd[r][k]) < 1e-4);
                CHECK(rel_err(Jl[r][k], fd[3 + r][k]) < 1e-4);
            }
    }
}

TEST_CASE("orientation inconsistency matches the reconstructed example") {
    auto A = lm_at({0, 0}, 0.2, 0.5);
    auto B = lm_at({5, 0}, 0.3, 0.8);
    auto [p1a, p1b] = prob_inconsistent_orientation({0.321, -0.5}, A, B);
    CHECK(std::fabs(p1a - 0.629) < 0.02);
    CHECK(p1b < 1e-4);
    auto [p2a, p2b] = prob_inconsistent_orientation({2.5, -0.5}, A, B);
    CHECK(p2a < 1e-4);
    CHECK(p2b < 1e-4);
    auto [p3a, p3b] = prob_inconsistent_orientation({5.437, -0.5}, A, B);
    CHECK(p3a < 1e-4);
    CHECK(std::fabs(p3b - 0.483) < 0.02);
}

TEST_CASE("zero sigma pins fl2 to zero off the lines") {
    auto A = lm_at({0, 0}, 0, 0);
    auto B = lm_at({5, 0}, 0, 0);
    auto [f1, f2] = prob_inconsistent_orientation({1.0, 2.0}, A, B);
    CHECK(f1 == 0.0);
    CHECK(f2 == 0.0);
}

TEST_CASE("circle parameterization endpoints") {
    Vec2 A{0, 0}, B{4.94, 0.78};
    Vec2 at0 = circle_point(A, B, 0.0);
    CHECK(distance(at0, B) < 1e-12);
    Vec2 at90 = circle_point(A, B, M_PI / 2.0);
    CHECK(distance(at90, A) < 1e-12);
}

TEST_CASE("J3 agrees with finite differences") {
    SplitMix64 rng(47);
    for (int t = 0; t < 300; ++t) {
        double phi = rng.next_unit() * M_PI;
        std::array<double, 4> x{rng.next_unit() * 10 - 5, rng.next_unit() * 10 - 5,
                                rng.next_unit() * 10 - 5, rng.next_unit() * 10 - 5};
        auto J = jacobian_circle(phi);
        auto fd = fd_jacobian(
            [phi](std::array<double, 4> p) {
                double c = std::cos(phi), s = std::sin(phi);
                double dx = p[2] - p[0], dy = p[3] - p[1];
                return std::vector<double>{dx * c * c + dy * s * c, dy * c * c - dx * s * c};
            },
            x);
        for (int k = 0; k < 4; ++k) {
            CHECK(rel_err(J[0][k], fd[0][k]) < 1e-4);
            CHECK(rel_err(J[1][k], fd[1][k]) < 1e-4);
        }
    }
}

TEST_CASE("angle inconsistency matches the reconstructed circle example") {
    auto A = lm_at({0, 0}, 0.2, 0.5);
    auto B = lm_at({4.94, 0.78}, 0.3, 0.8);
    const std::vector<std::pair<Vec2, double>> cases = {
        {{2.07, 1.17}, 0.000}, {{2.62, -2.11}, 1.037}, {{6.08, 3.08}, 0.000},
        {{3.22, -2.86}, 0.023}, {{4.60, -1.57}, 0.287}};
    for (auto& [o, want] : cases)
        CHECK(std::fabs(prob_inconsistent_angle(o, A, B) - want) < 0.05);
    CHECK_THROWS_AS(prob_inconsistent_angle({2.47, 0.39}, A, B), DataError);
}

TEST_CASE("boundary miss likelihood peaks on the range circle") {
    auto lm = lm_at({0, 0}, 0.4, 0.4);
    lm.max_range = 30.0;
    double peak = prob_missed_at_boundary({30.0, 0.0}, lm);
    CHECK(peak == Catch::Approx(1.0 / (2 * M_PI * 0.4 * 0.4)).epsilon(1e-9));
    CHECK(prob_missed_at_boundary({15.0, 0.0}, lm) < 1e-4);
    SplitMix64 rng(53);
    for (int t = 0; t < 100; ++t) {
        Vec2 o{rng.next_unit() * 80 - 40, rng.next_unit() * 80 - 40};
        if (o.norm() < 1.0) continue;
        Vec2 nearest = o * (30.0 / o.norm());
        double expected =
            std::exp(-0.5 * ((o - nearest).norm2() / 0.16)) / (2 * M_PI * 0.16);
        CHECK(rel_err(prob_missed_at_boundary(o, lm), expected) < 1e-9);
    }
}

TEST_CASE("propagated covariances are symmetric positive semidefinite") {
    SplitMix64 rng(59);
    for (int t = 0; t < 300; ++t) {
        auto A = lm_at({rng.next_unit() * 10 - 5, rng.next_unit() * 10 - 5},
                       rng.next_unit(), rng.next_unit());
        auto B = lm_at({rng.next_unit() * 10 - 5, rng.next_unit() * 10 - 5},
                       rng.next_unit(), rng.next_unit());
        if (std::fabs(B.centre.x - A.centre.x) < 0.2 ||
            std::fabs(B.centre.y - A.centre.y) < 0.2)
            continue;
        auto lu = propagate_to_line(A, B);
        std::vector<std::vector<double>> m(4, std::vector<double>(4));
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) {
                m[r][c] = lu.cov[r][c];
                CHECK(lu.cov[r][c] == Catch::Approx(lu.cov[c][r]).margin(1e-12));
            }
        for (double ev : sym_eigenvalues(m)) CHECK(ev >= -1e-10);

        double phi = rng.next_unit() * M_PI;
        auto J3 = jacobian_circle(phi);
        std::array<double, 4> var{A.sigma_x * A.sigma_x, A.sigma_y * A.sigma_y,
                                  B.sigma_x * B.sigma_x, B.sigma_y * B.sigma_y};
        std::vector<std::vector<double>> c2(2, std::vector<double>(2, 0.0));
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
                for (int k = 0; k < 4; ++k) c2[r][c] += J3[r][k] * var[k] * J3[c][k];
        for (double ev : sym_eigenvalues(c2)) CHECK(ev >= -1e-10);
    }
}

#include <cmath>

#include "doctest.h"
#include "kvtopo/bem.hpp"
#include "kvtopo/errors.hpp"

using namespace kvtopo;

namespace {

Mat2 rotation(double a) {
    Mat2 R;
    R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return R;
}

double max_abs(const Mat2& M) { return M.cwiseAbs().maxCoeff(); }

// Ellipse a = 2, b = 1 at 1024 panels, the self-convergence reference.
const double kEllipseRef11 = 9.4374768357;
const double kEllipseRef22 = 18.8749510732;

}  // namespace

TEST_CASE("fundamental solution") {
    CHECK(fundamental_solution({1.0, 0.0}) == doctest::Approx(0.0));
    CHECK(fundamental_solution({0.6, 0.8}) == doctest::Approx(0.0).scale(1.0));
    CHECK(fundamental_solution({std::exp(1.0), 0.0}) == doctest::Approx(-1.0 / (2.0 * kPi)));
    const Vec2 g = fundamental_solution_gradient({1.0, 0.0});
    CHECK(g.x() == doctest::Approx(-1.0 / (2.0 * kPi)));
    CHECK(g.y() == 0.0);
    CHECK_THROWS_AS(fundamental_solution({0.0, 0.0}), Error);
    CHECK_THROWS_AS(fundamental_solution_gradient({0.0, 0.0}), Error);
}

TEST_CASE("curve construction") {
    const PanelCurve c = PanelCurve::circle(1.0, 64);
    CHECK(c.size() == 64);
    for (int i = 0; i < c.size(); ++i) {
        const Panel& p = c.panels()[i];
        CHECK((p.b - c.panels()[(i + 1) % c.size()].a).norm() == 0.0);
        CHECK(p.normal.dot(p.midpoint) > 0.0);
        CHECK(p.length > 0.0);
    }
    CHECK(c.enclosed_area() == doctest::Approx(0.5 * 64 * std::sin(2.0 * kPi / 64)));
    std::vector<Vec2> cw{{0, 0}, {0, 1}, {1, 1}, {1, 0}};
    CHECK_THROWS_AS(PanelCurve::from_polygon(cw), GeometryError);
    CHECK_THROWS_AS(PanelCurve::from_polygon({{0, 0}, {1, 0}}), GeometryError);
    CHECK_THROWS_AS(PanelCurve::from_polygon({{0, 0}, {1, 0}, {1, 0}, {0, 1}}), GeometryError);
}

TEST_CASE("circle density is 2 cos(theta)") {
    const PanelCurve c = PanelCurve::circle(1.0, 256);
    const Density eta = solve_density(c, {1.0, 0.0});
    double worst = 0.0;
    for (int i = 0; i < c.size(); ++i) {
        const Vec2& m = c.panels()[i].midpoint;
        worst = std::max(worst, std::abs(eta.values[i] - 2.0 * m.x() / m.norm()));
    }
    CHECK(worst <= 0.02 * 2.0);
}

TEST_CASE("zero direction gives zero density") {
    const Density eta = solve_density(PanelCurve::circle(1.0, 32), {0.0, 0.0});
    CHECK(eta.values.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("rotating the direction rotates the density pattern") {
    const int n = 128;
    const int shift = 16;  // alpha = 2 pi * 16 / 128
    const double alpha = 2.0 * kPi * shift / n;
    const PanelCurve c = PanelCurve::circle(1.0, n);
    const Density e0 = solve_density(c, {1.0, 0.0});
    const Density e1 = solve_density(c, {std::cos(alpha), std::sin(alpha)});
    for (int i = 0; i < n; ++i) CHECK(e1.values[(i + shift) % n] == doctest::Approx(e0.values[i]).epsilon(1e-9));
}

TEST_CASE("unit disk polarization matrix is 2 pi I") {
    const Mat2 M = polarization_matrix(PanelCurve::circle(1.0, 256));
    CHECK(M(0, 0) == doctest::Approx(2.0 * kPi).epsilon(0.01));
    CHECK(M(1, 1) == doctest::Approx(2.0 * kPi).epsilon(0.01));
    CHECK(std::abs(M(0, 1)) <= 0.01 * 2.0 * kPi);
    CHECK(std::abs(M(1, 0)) <= 0.01 * 2.0 * kPi);
}

TEST_CASE("ellipse polarization matrix") {
    const Mat2 M = polarization_matrix(PanelCurve::ellipse(2.0, 1.0, 256));
    SUBCASE("within 0.5% of the 1024-panel reference") {
        CHECK(M(0, 0) == doctest::Approx(kEllipseRef11).epsilon(0.005));
        CHECK(M(1, 1) == doctest::Approx(kEllipseRef22).epsilon(0.005));
    }
    SUBCASE("close to the closed form diag(pi b (a + b), pi a (a + b))") {
        CHECK(M(0, 0) == doctest::Approx(3.0 * kPi).epsilon(0.01));
        CHECK(M(1, 1) == doctest::Approx(6.0 * kPi).epsilon(0.01));
    }
    SUBCASE("symmetric and diagonal-dominant with distinct diagonal") {
        CHECK(std::abs(M(0, 1) - M(1, 0)) <= 1e-3 * M.norm());
        CHECK(std::abs(M(0, 1)) < 1e-3 * M(0, 0));
        CHECK(M(1, 1) > M(0, 0) * 1.5);
    }
}

TEST_CASE("rotation equivariance on the ellipse") {
    const Mat2 R = rotation(kPi / 4);
    const Mat2 M = polarization_matrix(PanelCurve::ellipse(2.0, 1.0, 256));
    const Mat2 Mr = polarization_matrix(PanelCurve::ellipse(2.0, 1.0, 256).transformed(R));
    CHECK(max_abs(Mr - R * M * R.transpose()) <= 0.01 * max_abs(M));
    CHECK(std::abs(Mr(0, 1) - Mr(1, 0)) <= 1e-3 * Mr.norm());
}

TEST_CASE("panel refinement converges monotonically") {
    for (const auto& make : {+[](int n) { return PanelCurve::circle(1.0, n); },
                             +[](int n) { return PanelCurve::ellipse(2.0, 1.0, n, 0.3); }}) {
        const Mat2 m64 = polarization_matrix(make(64));
        const Mat2 m128 = polarization_matrix(make(128));
        const Mat2 m256 = polarization_matrix(make(256));
        const Mat2 m512 = polarization_matrix(make(512));
        const double d1 = (m64 - m128).norm(), d2 = (m128 - m256).norm(), d3 = (m256 - m512).norm();
        CHECK(d2 < d1);
        CHECK(d3 < d2);
    }
}

TEST_CASE("scaling the curve by s scales M by s^2") {
    const double s = 0.3;
    const Mat2 M1 = polarization_matrix(PanelCurve::ellipse(2.0, 1.0, 128, 0.2));
    const Mat2 Ms = polarization_matrix(PanelCurve::ellipse(2.0, 1.0, 128, 0.2).transformed(s * Mat2::Identity()));
    CHECK(max_abs(Ms - s * s * M1) <= 1e-9 * max_abs(M1));
}

TEST_CASE("density solve preconditions") {
    CHECK_THROWS_AS(solve_density(PanelCurve::circle(1.0, 8), {1.0, 0.0}), Error);
}

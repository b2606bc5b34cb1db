#include "kvtopo/bem.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/LU>

#include "kvtopo/errors.hpp"

namespace kvtopo {

PanelCurve PanelCurve::from_polygon(const std::vector<Vec2>& vertices) {
    const std::size_t n = vertices.size();
    if (n < 3) throw GeometryError("panel curve needs at least 3 vertices");
    if (!(polygon_signed_area(vertices) > 0.0)) throw GeometryError("panel curve must be counter-clockwise");
    PanelCurve c;
    c.panels_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Panel p;
        p.a = vertices[i];
        p.b = vertices[(i + 1) % n];
        const Vec2 d = p.b - p.a;
        p.length = d.norm();
        if (!(p.length > 0.0)) throw GeometryError("panel " + std::to_string(i) + " has zero length");
        p.normal = Vec2(d.y(), -d.x()) / p.length;
        p.midpoint = 0.5 * (p.a + p.b);
        c.panels_.push_back(p);
    }
    return c;
}

PanelCurve PanelCurve::circle(double radius, int n_panels) {
    return from_polygon(regular_polygon(Vec2::Zero(), radius, n_panels));
}

PanelCurve PanelCurve::ellipse(double a, double b, int n_panels, double angle) {
    std::vector<Vec2> v;
    v.reserve(n_panels);
    const double c = std::cos(angle), s = std::sin(angle);
    for (int k = 0; k < n_panels; ++k) {
        const double t = 2.0 * kPi * k / n_panels;
        const double x = a * std::cos(t), y = b * std::sin(t);
        v.emplace_back(c * x - s * y, s * x + c * y);
    }
    return from_polygon(v);
}

double PanelCurve::enclosed_area() const {
    double area = 0.0;
    for (const Panel& p : panels_) area += 0.5 * (p.a.x() * p.b.y() - p.b.x() * p.a.y());
    return area;
}

PanelCurve PanelCurve::transformed(const Mat2& linear) const {
    std::vector<Vec2> v;
    v.reserve(panels_.size());
    for (const Panel& p : panels_) v.push_back(linear * p.a);
    if (linear.determinant() < 0.0) std::reverse(v.begin(), v.end());
    return from_polygon(v);
}

double fundamental_solution(const Vec2& y) {
    const double r = y.norm();
    if (r == 0.0) throw Error("fundamental solution is singular at the origin");
    return -std::log(r) / (2.0 * kPi);
}

Vec2 fundamental_solution_gradient(const Vec2& y) {
    const double r2 = y.squaredNorm();
    if (r2 == 0.0) throw Error("fundamental solution is singular at the origin");
    return -y / (2.0 * kPi * r2);
}

namespace {

// 4-point Gauss-Legendre on [0, 1]
constexpr std::array<double, 4> kNodes{0.5 - 0.4305681557970263, 0.5 - 0.1699905217924281,
                                       0.5 + 0.1699905217924281, 0.5 + 0.4305681557970263};
constexpr std::array<double, 4> kWeights{0.5 * 0.3478548451374538, 0.5 * 0.6521451548625461,
                                         0.5 * 0.6521451548625461, 0.5 * 0.3478548451374538};

Eigen::MatrixXd collocation_matrix(const PanelCurve& curve) {
    const auto& P = curve.panels();
    const int n = curve.size();
    Eigen::MatrixXd A(n, n);
    for (int k = 0; k < n; ++k) {
        const Vec2& y = P[k].midpoint;
        const Vec2& ny = P[k].normal;
        for (int j = 0; j < n; ++j) {
            if (j == k) {
                // grad E(y - x) is tangent to a flat panel, so the self term vanishes
                A(k, j) = -0.5;
                continue;
            }
            double s = 0.0;
            for (int q = 0; q < 4; ++q) {
                const Vec2 x = P[j].a + kNodes[q] * (P[j].b - P[j].a);
                s += kWeights[q] * fundamental_solution_gradient(y - x).dot(ny);
            }
            A(k, j) = s * P[j].length;
        }
    }
    return A;
}

Eigen::MatrixXd solve_basis(const PanelCurve& curve, const Eigen::MatrixXd& rhs) {
    if (curve.size() < 12) throw GeometryError("solve_density: need at least 12 panels");
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(collocation_matrix(curve));
    if (!(lu.rcond() > 1e-12)) throw Error("solve_density: singular collocation matrix (invalid curve?)");
    return lu.solve(rhs);
}

}  // namespace

Density solve_density(const PanelCurve& curve, const Vec2& e) {
    Eigen::MatrixXd rhs(curve.size(), 1);
    for (int k = 0; k < curve.size(); ++k) rhs(k, 0) = -e.dot(curve.panels()[k].normal);
    return {solve_basis(curve, rhs).col(0)};
}

Mat2 polarization_matrix(const PanelCurve& curve) {
    const auto& P = curve.panels();
    Eigen::MatrixXd rhs(curve.size(), 2);
    for (int k = 0; k < curve.size(); ++k) {
        rhs(k, 0) = -P[k].normal.x();
        rhs(k, 1) = -P[k].normal.y();
    }
    const Eigen::MatrixXd eta = solve_basis(curve, rhs);
    Mat2 M = Mat2::Zero();
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < curve.size(); ++k) M.row(i) += eta(k, i) * P[k].length * P[k].midpoint.transpose();
    return M;
}

}  // namespace kvtopo

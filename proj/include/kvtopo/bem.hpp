#pragma once

#include <vector>

#include <Eigen/Core>

#include "kvtopo/geometry.hpp"

namespace kvtopo {

struct Panel {
    Vec2 a;
    Vec2 b;
    Vec2 normal;  // outward unit normal
    Vec2 midpoint;
    double length = 0.0;
};

/// Closed counter-clockwise polygonal approximation of the boundary of a
/// reference shape, one straight panel per edge.
class PanelCurve {
public:
    /// Throws GeometryError unless the polygon is closed-able, positively
    /// oriented and has no zero-length panel.
    static PanelCurve from_polygon(const std::vector<Vec2>& vertices);
    static PanelCurve circle(double radius, int n_panels);
    /// Ellipse with semi-axes a, b rotated by `angle`; vertices at equally
    /// spaced parametric angles.
    static PanelCurve ellipse(double a, double b, int n_panels, double angle = 0.0);

    const std::vector<Panel>& panels() const { return panels_; }
    int size() const { return static_cast<int>(panels_.size()); }
    double enclosed_area() const;
    PanelCurve transformed(const Mat2& linear) const;

private:
    std::vector<Panel> panels_;
};

/// Laplace fundamental solution E(y) = -log|y| / (2 pi).
double fundamental_solution(const Vec2& y);
/// grad E(y) = -y / (2 pi |y|^2).
Vec2 fundamental_solution_gradient(const Vec2& y);

/// Piecewise-constant density, one value per panel.
struct Density {
    Eigen::VectorXd values;
};

/// Solves -eta/2 + K' eta = -e.n by midpoint collocation, where K' is the
/// adjoint double-layer operator with kernel grad_y E(y - x) . n(y).
Density solve_density(const PanelCurve& curve, const Vec2& e);

/// (M)_ij = integral of eta_i y_j over the curve, eta_i the density for e = e_i.
Mat2 polarization_matrix(const PanelCurve& curve);

}  // namespace kvtopo

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "kvtopo/mesh.hpp"

namespace kvtopo {

using ScalarFunction = std::function<double(const Vec2&)>;
/// Boundary flux density gamma * grad(psi) . n, given the point and the
/// outward unit normal of the boundary edge.
using FluxFunction = std::function<double(const Vec2& point, const Vec2& normal)>;

/// Medium coefficient gamma with declared bounds 0 < lower <= gamma <= upper.
struct CoefficientField {
    ScalarFunction eval;
    double lower = 1.0;
    double upper = 1.0;

    double operator()(const Vec2& p) const { return eval(p); }

    static CoefficientField constant(double value);
};

/// Data of the overdetermined problem: gamma, source F, imposed flux Phi on
/// GammaA and measured trace psi_m on GammaA.
struct ProblemData {
    CoefficientField gamma = CoefficientField::constant(1.0);
    ScalarFunction source = [](const Vec2&) { return 0.0; };
    FluxFunction flux = [](const Vec2&, const Vec2&) { return 0.0; };
    ScalarFunction psi_m = [](const Vec2&) { return 0.0; };
};

struct Dirichlet {
    ScalarFunction value;
};

struct Neumann {
    FluxFunction flux;
};

using BoundaryCondition = std::variant<Dirichlet, Neumann>;

/// One condition per boundary tag. Where Dirichlet tags meet at a node the
/// first of GammaI, GammaA, Sigma wins.
class BCSpec {
public:
    BCSpec& set(BoundaryTag tag, BoundaryCondition condition);
    const BoundaryCondition* find(BoundaryTag tag) const;
    bool has_dirichlet() const;

private:
    std::map<BoundaryTag, BoundaryCondition> conditions_;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Stiffness matrix and load vector before boundary elimination; Neumann
/// contributions are already in the load.
struct RawSystem {
    SparseMatrix stiffness;
    Eigen::VectorXd load;
};

/// Linear system after symmetric Dirichlet elimination.
struct SparseSystem {
    std::shared_ptr<const Mesh> mesh;
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    std::vector<bool> dirichlet;  // per node
};

/// Nodal P1 field.
struct ScalarField {
    std::shared_ptr<const Mesh> mesh;
    Eigen::VectorXd values;

    double operator[](int node) const { return values[node]; }
};

RawSystem assemble_raw(const Mesh& mesh, const ProblemData& data, const BCSpec& bc);
SparseSystem assemble(std::shared_ptr<const Mesh> mesh, const ProblemData& data, const BCSpec& bc);

struct SolverOptions {
    double rel_tolerance = 1e-10;
    /// 0 means 10 * number of unknowns.
    int max_iterations = 0;
};

struct SolverStats {
    int iterations = 0;
    double rel_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients. Throws ConvergenceError on
/// breakdown (non-positive curvature) or when the iteration cap is hit.
Eigen::VectorXd conjugate_gradient(const SparseMatrix& A, const Eigen::VectorXd& b, const SolverOptions& opts = {},
                                   SolverStats* stats = nullptr);

ScalarField solve(const SparseSystem& system, const SolverOptions& opts = {}, SolverStats* stats = nullptr);

/// Element gradient of a P1 field on triangle t.
Vec2 element_gradient(const Mesh& mesh, int t, const Eigen::VectorXd& values);

struct GradientField {
    std::vector<Vec2> element;  // exact P1 gradient per triangle
    std::vector<Vec2> nodal;    // area-weighted average of incident triangles
};

GradientField recover_gradient(const ScalarField& field);

/// Triangle containing p (closed), or -1.
int locate(const Mesh& mesh, const Vec2& p);
/// Barycentric coordinates of p in triangle t.
Eigen::Vector3d barycentric(const Mesh& mesh, int t, const Vec2& p);
/// Linear interpolation of a nodal field at p; nullopt outside the mesh.
std::optional<double> interpolate(const Mesh& mesh, const Eigen::VectorXd& values, const Vec2& p);

}  // namespace kvtopo

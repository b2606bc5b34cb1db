#pragma once

#include <memory>
#include <vector>

#include "kvtopo/fem.hpp"

namespace kvtopo {

/// Solutions of the Neumann-data problem (flux Phi on GammaA) and of the
/// Dirichlet-data problem (trace psi_m on GammaA) on the same mesh. Both use
/// psi = 0 on GammaI and zero flux on Sigma.
struct ForwardPair {
    std::shared_ptr<const Mesh> mesh;
    std::shared_ptr<const ProblemData> data;
    ScalarField psi_N;
    ScalarField psi_D;
};

BCSpec neumann_conditions(const ProblemData& data);
BCSpec dirichlet_conditions(const ProblemData& data);

ForwardPair solve_pair(std::shared_ptr<const Mesh> mesh, std::shared_ptr<const ProblemData> data,
                       const SolverOptions& opts = {});

/// Energy misfit sum_T |T| gamma(centroid) |grad psi_D - grad psi_N|^2.
double evaluate_K(const Mesh& mesh, const CoefficientField& gamma, const Eigen::VectorXd& psi_N,
                  const Eigen::VectorXd& psi_D);
double evaluate_K(const ForwardPair& pair);

struct TopGradResult {
    ForwardPair pair;
    double K_value = 0.0;
    ScalarField deltaK;          // zero on masked nodes
    std::vector<bool> interior;  // false on boundary nodes

    /// Interior node with the most negative deltaK (-1 if there is none).
    int argmin_node() const;
    double min_value() const;
};

/// Disk-shaped inclusion gradient in d = 2:
/// gamma (|grad psi_N|^2 - |grad psi_D|^2) - F (psi_N - psi_D) at every interior node.
TopGradResult topological_gradient(const ForwardPair& pair);

/// Arbitrary reference shape with polarization matrix M and area |omega|:
/// gamma (gN.M gN - gD.M gD) - 2 |omega| F (psi_N - psi_D).
TopGradResult general_topological_gradient(const ForwardPair& pair, const Mat2& M, double omega_area);

/// Pointwise disk formula for d = 2 or 3 (the source weight is 1 resp. 4/3).
double disk_gradient_formula(int dim, double gamma, double grad_N_sq, double grad_D_sq, double source, double psi_N,
                             double psi_D);

/// Piecewise-linear interpolant of nodal values along the GammaA edges of a mesh.
class BoundaryTrace {
public:
    BoundaryTrace(const Mesh& mesh, const Eigen::VectorXd& values, BoundaryTag tag = BoundaryTag::GammaA);
    double operator()(const Vec2& p) const;

private:
    std::vector<std::pair<Vec2, Vec2>> edges_;
    std::vector<std::pair<double, double>> values_;
};

/// Data whose measured trace is the mesh's own Neumann solution on GammaA, so
/// that both forward problems coincide.
ProblemData with_consistent_measurement(std::shared_ptr<const Mesh> mesh, const ProblemData& data,
                                        const SolverOptions& opts = {});

}  // namespace kvtopo

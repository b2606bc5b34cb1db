#include "kvtopo/kv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kvtopo/errors.hpp"

namespace kvtopo {

BCSpec neumann_conditions(const ProblemData& data) {
    BCSpec bc;
    bc.set(BoundaryTag::GammaA, Neumann{data.flux});
    bc.set(BoundaryTag::GammaI, Dirichlet{[](const Vec2&) { return 0.0; }});
    bc.set(BoundaryTag::Sigma, Neumann{[](const Vec2&, const Vec2&) { return 0.0; }});
    return bc;
}

BCSpec dirichlet_conditions(const ProblemData& data) {
    BCSpec bc;
    bc.set(BoundaryTag::GammaA, Dirichlet{data.psi_m});
    bc.set(BoundaryTag::GammaI, Dirichlet{[](const Vec2&) { return 0.0; }});
    bc.set(BoundaryTag::Sigma, Neumann{[](const Vec2&, const Vec2&) { return 0.0; }});
    return bc;
}

ForwardPair solve_pair(std::shared_ptr<const Mesh> mesh, std::shared_ptr<const ProblemData> data,
                       const SolverOptions& opts) {
    if (!mesh->has_tag(BoundaryTag::GammaA) || !mesh->has_tag(BoundaryTag::GammaI))
        throw GeometryError("solve_pair: mesh needs both GammaA and GammaI boundary edges");
    ForwardPair pair;
    pair.mesh = mesh;
    pair.data = data;
    pair.psi_N = solve(assemble(mesh, *data, neumann_conditions(*data)), opts);
    pair.psi_D = solve(assemble(mesh, *data, dirichlet_conditions(*data)), opts);
    return pair;
}

double evaluate_K(const Mesh& mesh, const CoefficientField& gamma, const Eigen::VectorXd& psi_N,
                  const Eigen::VectorXd& psi_D) {
    const Eigen::VectorXd diff = psi_D - psi_N;
    double k = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t)
        k += mesh.area(t) * gamma(mesh.centroid(t)) * element_gradient(mesh, t, diff).squaredNorm();
    return k;
}

double evaluate_K(const ForwardPair& pair) {
    return evaluate_K(*pair.mesh, pair.data->gamma, pair.psi_N.values, pair.psi_D.values);
}

int TopGradResult::argmin_node() const {
    int best = -1;
    for (std::size_t v = 0; v < interior.size(); ++v)
        if (interior[v] && (best < 0 || deltaK.values[v] < deltaK.values[best])) best = static_cast<int>(v);
    return best;
}

double TopGradResult::min_value() const {
    const int v = argmin_node();
    return v < 0 ? std::numeric_limits<double>::quiet_NaN() : deltaK.values[v];
}

double disk_gradient_formula(int dim, double gamma, double grad_N_sq, double grad_D_sq, double source, double psi_N,
                             double psi_D) {
    if (dim != 2 && dim != 3) throw Error("disk_gradient_formula: dimension must be 2 or 3");
    const double weight = dim == 2 ? 1.0 : 4.0 / 3.0;
    return gamma * (grad_N_sq - grad_D_sq) - weight * source * (psi_N - psi_D);
}

namespace {

template <class PointValue>
TopGradResult nodal_gradient(const ForwardPair& pair, PointValue&& value) {
    const Mesh& mesh = *pair.mesh;
    const GradientField gN = recover_gradient(pair.psi_N);
    const GradientField gD = recover_gradient(pair.psi_D);
    TopGradResult r;
    r.pair = pair;
    r.K_value = evaluate_K(pair);
    r.deltaK.mesh = pair.mesh;
    r.deltaK.values = Eigen::VectorXd::Zero(mesh.num_nodes());
    const auto boundary = mesh.boundary_node_mask();
    r.interior.resize(mesh.nodes.size());
    for (int v = 0; v < mesh.num_nodes(); ++v) {
        r.interior[v] = !boundary[v];
        if (!r.interior[v]) continue;
        r.deltaK.values[v] = value(mesh.nodes[v], gN.nodal[v], gD.nodal[v], pair.psi_N[v], pair.psi_D[v]);
    }
    return r;
}

}  // namespace

TopGradResult topological_gradient(const ForwardPair& pair) {
    const ProblemData& d = *pair.data;
    return nodal_gradient(pair, [&](const Vec2& x, const Vec2& gN, const Vec2& gD, double pN, double pD) {
        return disk_gradient_formula(2, d.gamma(x), gN.squaredNorm(), gD.squaredNorm(), d.source(x), pN, pD);
    });
}

TopGradResult general_topological_gradient(const ForwardPair& pair, const Mat2& M, double omega_area) {
    const double scale = std::max(M.norm(), std::numeric_limits<double>::min());
    if (std::abs(M(0, 1) - M(1, 0)) > 1e-3 * scale)
        throw Error("general_topological_gradient: polarization matrix is not symmetric");
    if (omega_area < 0.0) throw Error("general_topological_gradient: negative shape area");
    const Mat2 S = 0.5 * (M + M.transpose());
    const ProblemData& d = *pair.data;
    return nodal_gradient(pair, [&](const Vec2& x, const Vec2& gN, const Vec2& gD, double pN, double pD) {
        return d.gamma(x) * (gN.dot(S * gN) - gD.dot(S * gD)) - 2.0 * omega_area * d.source(x) * (pN - pD);
    });
}

BoundaryTrace::BoundaryTrace(const Mesh& mesh, const Eigen::VectorXd& values, BoundaryTag tag) {
    for (const auto& e : mesh.boundary) {
        if (e.tag != tag) continue;
        edges_.emplace_back(mesh.nodes[e.a], mesh.nodes[e.b]);
        values_.emplace_back(values[e.a], values[e.b]);
    }
    if (edges_.empty()) throw GeometryError("BoundaryTrace: no edges with the requested tag");
}

double BoundaryTrace::operator()(const Vec2& p) const {
    double best = std::numeric_limits<double>::infinity(), out = 0.0;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const auto& [a, b] = edges_[i];
        const Vec2 ab = b - a;
        const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
        const double d = (p - (a + t * ab)).norm();
        if (d < best) {
            best = d;
            out = (1.0 - t) * values_[i].first + t * values_[i].second;
        }
    }
    return out;
}

ProblemData with_consistent_measurement(std::shared_ptr<const Mesh> mesh, const ProblemData& data,
                                        const SolverOptions& opts) {
    const ScalarField psi = solve(assemble(mesh, data, neumann_conditions(data)), opts);
    ProblemData out = data;
    out.psi_m = BoundaryTrace(*mesh, psi.values);
    return out;
}

}  // namespace kvtopo

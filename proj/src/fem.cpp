#include "kvtopo/fem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "kvtopo/errors.hpp"

namespace kvtopo {

CoefficientField CoefficientField::constant(double value) {
    return {[value](const Vec2&) { return value; }, value, value};
}

BCSpec& BCSpec::set(BoundaryTag tag, BoundaryCondition condition) {
    conditions_.insert_or_assign(tag, std::move(condition));
    return *this;
}

const BoundaryCondition* BCSpec::find(BoundaryTag tag) const {
    const auto it = conditions_.find(tag);
    return it == conditions_.end() ? nullptr : &it->second;
}

bool BCSpec::has_dirichlet() const {
    for (const auto& [tag, c] : conditions_)
        if (std::holds_alternative<Dirichlet>(c)) return true;
    return false;
}

namespace {

// gradients of the three hat functions on triangle t
std::array<Vec2, 3> basis_gradients(const Mesh& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    const double two_area = 2.0 * mesh.area(t);
    std::array<Vec2, 3> g;
    for (int i = 0; i < 3; ++i) {
        const Vec2 e = mesh.nodes[tri[(i + 2) % 3]] - mesh.nodes[tri[(i + 1) % 3]];
        g[i] = Vec2(-e.y(), e.x()) / two_area;
    }
    return g;
}

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

// node opposite to each boundary edge, used to orient the outward normal
std::vector<int> opposite_nodes(const Mesh& mesh) {
    std::unordered_map<std::uint64_t, int> opp;
    opp.reserve(3 * mesh.triangles.size());
    for (const auto& tri : mesh.triangles)
        for (int k = 0; k < 3; ++k) opp[edge_key(tri[k], tri[(k + 1) % 3])] = tri[(k + 2) % 3];
    std::vector<int> out;
    out.reserve(mesh.boundary.size());
    for (const auto& e : mesh.boundary) out.push_back(opp.at(edge_key(e.a, e.b)));
    return out;
}

constexpr std::array<BoundaryTag, 3> kDirichletPriority{BoundaryTag::GammaI, BoundaryTag::GammaA, BoundaryTag::Sigma};

}  // namespace

RawSystem assemble_raw(const Mesh& mesh, const ProblemData& data, const BCSpec& bc) {
    for (const auto& e : mesh.boundary)
        if (!bc.find(e.tag))
            throw AssemblyError("no boundary condition for tag " + std::string(tag_name(e.tag)));

    const int n = mesh.num_nodes();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * mesh.triangles.size());
    Eigen::VectorXd load = Eigen::VectorXd::Zero(n);

    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Vec2 c = mesh.centroid(t);
        const double g = data.gamma(c);
        if (!(g > 0.0))
            throw AssemblyError("non-positive coefficient gamma at centroid of triangle " + std::to_string(t));
        if (g < data.gamma.lower || g > data.gamma.upper)
            throw AssemblyError("coefficient gamma outside its declared bounds at triangle " + std::to_string(t));
        const double area = mesh.area(t);
        const auto grad = basis_gradients(mesh, t);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], g * area * grad[i].dot(grad[j]));
        // edge-midpoint rule: each hat is 1/2 at its two adjacent midpoints
        std::array<double, 3> f_mid;  // f_mid[k]: midpoint of edge (k, k+1)
        for (int k = 0; k < 3; ++k)
            f_mid[k] = data.source(0.5 * (mesh.nodes[tri[k]] + mesh.nodes[tri[(k + 1) % 3]]));
        for (int i = 0; i < 3; ++i) load[tri[i]] += area / 6.0 * (f_mid[i] + f_mid[(i + 2) % 3]);
    }

    const auto opposite = opposite_nodes(mesh);
    const double gp = 0.5 / std::sqrt(3.0);
    for (std::size_t k = 0; k < mesh.boundary.size(); ++k) {
        const auto& e = mesh.boundary[k];
        const auto* neumann = std::get_if<Neumann>(bc.find(e.tag));
        if (!neumann) continue;
        const Vec2& a = mesh.nodes[e.a];
        const Vec2& b = mesh.nodes[e.b];
        const double len = (b - a).norm();
        Vec2 normal = Vec2(b.y() - a.y(), a.x() - b.x()) / len;
        if (normal.dot(mesh.nodes[opposite[k]] - a) > 0.0) normal = -normal;
        for (const double t : {0.5 - gp, 0.5 + gp}) {
            const double phi = neumann->flux(a + t * (b - a), normal);
            load[e.a] += 0.5 * len * phi * (1.0 - t);
            load[e.b] += 0.5 * len * phi * t;
        }
    }

    RawSystem raw;
    raw.stiffness.resize(n, n);
    raw.stiffness.setFromTriplets(trip.begin(), trip.end());
    raw.load = std::move(load);
    return raw;
}

SparseSystem assemble(std::shared_ptr<const Mesh> mesh, const ProblemData& data, const BCSpec& bc) {
    if (!bc.has_dirichlet()) throw AssemblyError("singular system: no Dirichlet boundary condition");
    RawSystem raw = assemble_raw(*mesh, data, bc);
    const int n = mesh->num_nodes();

    std::vector<bool> fixed(n, false);
    Eigen::VectorXd value = Eigen::VectorXd::Zero(n);
    for (const BoundaryTag tag : kDirichletPriority) {
        const auto* c = bc.find(tag);
        const auto* d = c ? std::get_if<Dirichlet>(c) : nullptr;
        if (!d) continue;
        for (const auto& e : mesh->boundary) {
            if (e.tag != tag) continue;
            for (int v : {e.a, e.b}) {
                if (fixed[v]) continue;
                fixed[v] = true;
                value[v] = d->value(mesh->nodes[v]);
            }
        }
    }
    if (std::none_of(fixed.begin(), fixed.end(), [](bool f) { return f; }))
        throw AssemblyError("singular system: no Dirichlet node in the mesh");

    SparseSystem sys;
    sys.mesh = std::move(mesh);
    sys.rhs = std::move(raw.load);
    SparseMatrix& A = raw.stiffness;
    for (int i = 0; i < n; ++i) {
        for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
            const int j = static_cast<int>(it.col());
            if (fixed[i]) {
                it.valueRef() = (i == j) ? 1.0 : 0.0;
            } else if (fixed[j]) {
                sys.rhs[i] -= it.value() * value[j];
                it.valueRef() = 0.0;
            }
        }
        if (fixed[i]) sys.rhs[i] = value[i];
    }
    sys.matrix = std::move(A);
    sys.dirichlet = std::move(fixed);
    return sys;
}

Eigen::VectorXd conjugate_gradient(const SparseMatrix& A, const Eigen::VectorXd& b, const SolverOptions& opts,
                                   SolverStats* stats) {
    const Eigen::Index n = b.size();
    if (A.rows() != n || A.cols() != n) throw Error("conjugate_gradient: dimension mismatch");
    const int cap = opts.max_iterations > 0 ? opts.max_iterations : static_cast<int>(10 * n);

    Eigen::VectorXd inv_diag(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = A.coeff(i, i);
        if (!(d > 0.0)) throw ConvergenceError("conjugate_gradient: non-positive diagonal entry", 1.0);
        inv_diag[i] = 1.0 / d;
    }

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        if (stats) *stats = {0, 0.0};
        return x;
    }
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    Eigen::VectorXd p = z;
    Eigen::VectorXd Ap(n);
    double rz = r.dot(z);
    double rel = 1.0;
    for (int it = 0; it < cap; ++it) {
        Ap.noalias() = A * p;
        const double curvature = p.dot(Ap);
        if (!(curvature > 0.0))
            throw ConvergenceError("conjugate_gradient: breakdown, matrix is not positive definite", rel);
        const double alpha = rz / curvature;
        x.noalias() += alpha * p;
        r.noalias() -= alpha * Ap;
        rel = r.norm() / bnorm;
        if (rel <= opts.rel_tolerance) {
            if (stats) *stats = {it + 1, rel};
            return x;
        }
        z = inv_diag.cwiseProduct(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    throw ConvergenceError("conjugate_gradient: iteration cap of " + std::to_string(cap) + " reached", rel);
}

ScalarField solve(const SparseSystem& system, const SolverOptions& opts, SolverStats* stats) {
    ScalarField f;
    f.mesh = system.mesh;
    f.values = conjugate_gradient(system.matrix, system.rhs, opts, stats);
    for (Eigen::Index i = 0; i < f.values.size(); ++i)
        if (system.dirichlet.size() == static_cast<std::size_t>(f.values.size()) && system.dirichlet[i])
            f.values[i] = system.rhs[i];
    return f;
}

Vec2 element_gradient(const Mesh& mesh, int t, const Eigen::VectorXd& values) {
    const auto grad = basis_gradients(mesh, t);
    const auto& tri = mesh.triangles[t];
    return values[tri[0]] * grad[0] + values[tri[1]] * grad[1] + values[tri[2]] * grad[2];
}

GradientField recover_gradient(const ScalarField& field) {
    const Mesh& mesh = *field.mesh;
    GradientField g;
    g.element.resize(mesh.triangles.size());
    g.nodal.assign(mesh.nodes.size(), Vec2::Zero());
    std::vector<double> weight(mesh.nodes.size(), 0.0);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        g.element[t] = element_gradient(mesh, t, field.values);
        const double a = mesh.area(t);
        for (int v : mesh.triangles[t]) {
            g.nodal[v] += a * g.element[t];
            weight[v] += a;
        }
    }
    for (std::size_t v = 0; v < weight.size(); ++v)
        if (weight[v] > 0.0) g.nodal[v] /= weight[v];
    return g;
}

Eigen::Vector3d barycentric(const Mesh& mesh, int t, const Vec2& p) {
    const auto& tri = mesh.triangles[t];
    const Vec2& a = mesh.nodes[tri[0]];
    const Vec2& b = mesh.nodes[tri[1]];
    const Vec2& c = mesh.nodes[tri[2]];
    const double two_area = orient(a, b, c);
    return {orient(p, b, c) / two_area, orient(a, p, c) / two_area, orient(a, b, p) / two_area};
}

int locate(const Mesh& mesh, const Vec2& p) {
    constexpr double tol = -1e-12;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Eigen::Vector3d l = barycentric(mesh, t, p);
        if (l.minCoeff() >= tol) return t;
    }
    return -1;
}

std::optional<double> interpolate(const Mesh& mesh, const Eigen::VectorXd& values, const Vec2& p) {
    const int t = locate(mesh, p);
    if (t < 0) return std::nullopt;
    const Eigen::Vector3d l = barycentric(mesh, t, p);
    const auto& tri = mesh.triangles[t];
    return l[0] * values[tri[0]] + l[1] * values[tri[1]] + l[2] * values[tri[2]];
}

}  // namespace kvtopo

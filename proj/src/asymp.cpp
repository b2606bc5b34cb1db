#include "kvtopo/asymp.hpp"

#include <algorithm>
#include <cmath>

#include "kvtopo/errors.hpp"

namespace kvtopo {

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (x[i] > 0.0 && y[i] != 0.0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(std::abs(y[i])));
        }
    }
    const std::size_t n = lx.size();
    if (n < 2) throw Error("log-log fit needs at least 2 nonzero points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw Error("log-log fit needs distinct abscissae");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n >= 3) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
            rss += r * r;
        }
        fit.slope_stderr = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    }
    return fit;
}

namespace {

void check_eps_list(const std::vector<double>& eps) {
    if (eps.empty()) throw Error("eps list is empty");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0)) throw Error("eps values must be positive");
        if (i > 0 && !(eps[i] < eps[i - 1])) throw Error("eps list must be strictly decreasing");
    }
}

double interpolate_nodal(const TopGradResult& tg, const Vec2& z) {
    const auto v = interpolate(*tg.pair.mesh, tg.deltaK.values, z);
    if (!v) throw GeometryError("sweep point lies outside the mesh");
    return *v;
}

double energy_scale(const TopGradResult& tg) {
    const GradientField g = recover_gradient(tg.pair.psi_N);
    const Mesh& mesh = *tg.pair.mesh;
    double s = 0.0;
    for (int v = 0; v < mesh.num_nodes(); ++v)
        if (tg.interior[v]) s = std::max(s, tg.pair.data->gamma(mesh.nodes[v]) * g.nodal[v].squaredNorm());
    return s;
}

}  // namespace

SweepReport sweep(const DomainSpec& spec, const TopGradResult& background, const Vec2& z,
                  const std::vector<double>& eps_list, const SweepOptions& opts) {
    check_eps_list(eps_list);
    SweepReport rep;
    rep.z = z;
    rep.deltaK_z = interpolate_nodal(background, z);
    const bool null_prediction = std::abs(rep.deltaK_z) <= opts.null_tolerance * energy_scale(background);
    const auto& data = background.pair.data;

    for (double eps : eps_list) {
        try {
            const Perturbation hole{z, eps, opts.n_segments};
            const PuncturedPair pp = puncture_with_fill(spec, hole);
            const double k_hole = evaluate_K(solve_pair(std::make_shared<const Mesh>(pp.punctured), data, opts.solver));
            const double k_full = evaluate_K(solve_pair(std::make_shared<const Mesh>(pp.filled), data, opts.solver));
            const double predicted = 2.0 * kPi * eps * eps * rep.deltaK_z;
            rep.eps_list.push_back(eps);
            rep.measured.push_back(k_hole - k_full);
            rep.predicted.push_back(predicted);
            rep.ratios.push_back(null_prediction ? std::nullopt : std::optional<double>((k_hole - k_full) / predicted));
        } catch (const Error& e) {
            rep.skipped.emplace_back(eps, e.what());
        }
    }
    if (!null_prediction && rep.eps_list.size() >= 2) rep.fit = fit_loglog(rep.eps_list, rep.measured);
    return rep;
}

SweepReport sweep(const DomainSpec& spec, std::shared_ptr<const ProblemData> data, const Vec2& z,
                  const std::vector<double>& eps_list, const SweepOptions& opts) {
    check_eps_list(eps_list);
    auto mesh = std::make_shared<const Mesh>(generate_mesh(spec));
    return sweep(spec, topological_gradient(solve_pair(mesh, std::move(data), opts.solver)), z, eps_list, opts);
}

int admissible_argmin(const TopGradResult& tg, const DomainSpec& spec, double clearance) {
    const Mesh& mesh = *tg.pair.mesh;
    int best = -1;
    for (int v = 0; v < mesh.num_nodes(); ++v) {
        if (!tg.interior[v] || distance_to_boundary(spec, mesh.nodes[v]) < clearance) continue;
        if (best < 0 || tg.deltaK.values[v] < tg.deltaK.values[best]) best = v;
    }
    return best;
}

double sweep_clearance(const std::vector<double>& eps_list) {
    double m = 0.0;
    for (double e : eps_list) m = std::max(m, e);
    return 3.0 * m * 1.01;
}

namespace {

// exact P1 integral of |grad d|^2 + d^2 over one triangle
double h1_contribution(const Mesh& mesh, int t, const Eigen::VectorXd& d) {
    const auto& tri = mesh.triangles[t];
    const double a = mesh.area(t);
    const double d0 = d[tri[0]], d1 = d[tri[1]], d2 = d[tri[2]];
    const double sum = d0 + d1 + d2;
    const double l2 = a / 12.0 * (d0 * d0 + d1 * d1 + d2 * d2 + sum * sum);
    return a * element_gradient(mesh, t, d).squaredNorm() + l2;
}

}  // namespace

RemainderReport remainder_scaling(const DomainSpec& spec, std::shared_ptr<const ProblemData> data, const Vec2& z,
                                  const std::vector<double>& eps_list, const SweepOptions& opts) {
    if (eps_list.size() < 3) throw Error("need >= 3 epsilons for a fit");
    check_eps_list(eps_list);
    RemainderReport rep;
    std::vector<double> reference;  // ||psi_N^0||_H1 on the same annulus
    for (double eps : eps_list) {
        try {
            const PuncturedPair pp = puncture_with_fill(spec, Perturbation{z, eps, opts.n_segments});
            auto punct = std::make_shared<const Mesh>(pp.punctured);
            auto filled = std::make_shared<const Mesh>(pp.filled);
            const ScalarField u_eps = solve(assemble(punct, *data, neumann_conditions(*data)), opts.solver);
            const ScalarField u_0 = solve(assemble(filled, *data, neumann_conditions(*data)), opts.solver);
            Eigen::VectorXd u0_on_punct(punct->num_nodes());
            for (int v = 0; v < punct->num_nodes(); ++v) u0_on_punct[v] = u_0.values[pp.node_to_filled[v]];
            const Eigen::VectorXd diff = u_eps.values - u0_on_punct;
            const double R = opts.far_field_factor * eps;
            double n2 = 0.0, r2 = 0.0;
            for (int t = 0; t < punct->num_triangles(); ++t) {
                if ((punct->centroid(t) - z).norm() >= R) continue;
                n2 += h1_contribution(*punct, t, diff);
                r2 += h1_contribution(*punct, t, u0_on_punct);
            }
            rep.eps_list.push_back(eps);
            rep.norms.push_back(std::sqrt(n2));
            reference.push_back(std::sqrt(r2));
        } catch (const Error& e) {
            rep.skipped.emplace_back(eps, e.what());
        }
    }
    bool signal = false;
    for (std::size_t i = 0; i < rep.norms.size(); ++i) signal = signal || rep.norms[i] > 1e-8 * reference[i];
    if (signal && rep.eps_list.size() >= 3) rep.fit = fit_loglog(rep.eps_list, rep.norms);
    return rep;
}

}  // namespace kvtopo

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kvtopo/kv.hpp"

namespace kvtopo {

struct SweepOptions {
    int n_segments = 32;            // hole polygon sides; edge 2 eps sin(pi/n) <= eps/4 for n >= 13
    double far_field_factor = 4.0;  // remainder norm taken on eps < |x - z| < factor * eps
    double null_tolerance = 1e-6;   // |deltaK(z)| below this times max gamma|grad psi_N|^2 counts as zero
    SolverOptions solver{};
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::optional<double> slope_stderr;  // needs >= 3 points
};

/// Least-squares fit of log|y| against log x. Requires >= 2 points with y != 0.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct SweepReport {
    Vec2 z;
    double deltaK_z = 0.0;
    std::vector<double> eps_list;  // resolved epsilons, strictly decreasing
    std::vector<double> measured;  // K(punctured) - K(filled) on the same triangulation
    std::vector<double> predicted;  // 2 pi eps^2 deltaK(z)
    std::vector<std::optional<double>> ratios;  // empty when the prediction is null
    std::vector<std::pair<double, std::string>> skipped;
    std::optional<LineFit> fit;
};

/// Measured versus predicted variation of K when a disk hole of radius eps is
/// inserted at z. deltaK(z) comes from the unperturbed mesh of `spec`.
SweepReport sweep(const DomainSpec& spec, std::shared_ptr<const ProblemData> data, const Vec2& z,
                  const std::vector<double>& eps_list, const SweepOptions& opts = {});

/// Same, with the unperturbed gradient already computed.
SweepReport sweep(const DomainSpec& spec, const TopGradResult& background, const Vec2& z,
                  const std::vector<double>& eps_list, const SweepOptions& opts = {});

/// Interior node with the smallest deltaK among nodes at distance >= clearance
/// from the outer boundary; -1 if there is none.
int admissible_argmin(const TopGradResult& tg, const DomainSpec& spec, double clearance);

/// Clearance that admits every eps of a sweep: 3 max(eps) plus a 1% margin.
double sweep_clearance(const std::vector<double>& eps_list);

struct RemainderReport {
    std::vector<double> eps_list;
    std::vector<double> norms;  // ||psi_N^eps - psi_N^0||_H1 on the far-field annulus
    std::vector<std::pair<double, std::string>> skipped;
    std::optional<LineFit> fit;  // empty when all norms are at solver-noise level
};

/// Far-field proxy for the corrector remainder: H1 norm of the Neumann
/// solution change on eps < |x - z| < far_field_factor * eps, measured on the
/// punctured mesh against the filled mesh with the same nodes. Throws Error
/// "need >= 3 epsilons for a fit" for shorter lists.
RemainderReport remainder_scaling(const DomainSpec& spec, std::shared_ptr<const ProblemData> data, const Vec2& z,
                                  const std::vector<double>& eps_list, const SweepOptions& opts = {});

}  // namespace kvtopo

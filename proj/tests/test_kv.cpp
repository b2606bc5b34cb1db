#include <cmath>

#include "doctest.h"
#include "kvtopo/errors.hpp"
#include "kvtopo/kv.hpp"
#include "scenario.hpp"

using namespace kvtopo;

namespace {

std::shared_ptr<const Mesh> square_mesh(double h) {
    return std::make_shared<const Mesh>(generate_mesh(testing::unit_square(h)));
}

Eigen::VectorXd nodal(const Mesh& m, const std::function<double(const Vec2&)>& f) {
    Eigen::VectorXd v(m.num_nodes());
    for (int i = 0; i < m.num_nodes(); ++i) v[i] = f(m.nodes[i]);
    return v;
}

// pair with prescribed nodal fields, bypassing the solves
ForwardPair manual_pair(std::shared_ptr<const Mesh> mesh, std::shared_ptr<const ProblemData> data,
                        const std::function<double(const Vec2&)>& fN, const std::function<double(const Vec2&)>& fD) {
    return {mesh, data, {mesh, nodal(*mesh, fN)}, {mesh, nodal(*mesh, fD)}};
}

}  // namespace

TEST_CASE("consistent data gives identical forward solutions") {
    auto mesh = square_mesh(0.05);
    auto data = std::make_shared<const ProblemData>(with_consistent_measurement(mesh, testing::reference_data()));
    const ForwardPair pair = solve_pair(mesh, data);
    CHECK((pair.psi_N.values - pair.psi_D.values).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("linear data: both solutions equal the interpolant of x") {
    auto mesh = square_mesh(0.1);
    auto data = std::make_shared<ProblemData>();
    data->flux = [](const Vec2&, const Vec2& n) { return n.x(); };
    data->psi_m = [](const Vec2& p) { return p.x(); };
    const ForwardPair pair = solve_pair(mesh, data);
    const Eigen::VectorXd x = nodal(*mesh, [](const Vec2& p) { return p.x(); });
    CHECK((pair.psi_N.values - x).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK((pair.psi_D.values - x).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK(evaluate_K(pair) <= 1e-14);
}

TEST_CASE("inconsistent data gives positive K (frozen regression)") {
    auto mesh = square_mesh(0.1);
    auto data = std::make_shared<ProblemData>();
    data->flux = [](const Vec2&, const Vec2& n) { return n.x(); };
    data->psi_m = [](const Vec2& p) { return p.x() + 0.1 * std::sin(kPi * p.y()); };
    const double K = evaluate_K(solve_pair(mesh, data));
    CHECK(K > 0.0);
    CHECK(K == doctest::Approx(1.581428546532e-02).epsilon(1e-8));
}

TEST_CASE("evaluate_K on prescribed fields") {
    auto mesh = square_mesh(0.1);
    auto data = std::make_shared<ProblemData>();
    auto zero = [](const Vec2&) { return 0.0; };
    auto x = [](const Vec2& p) { return p.x(); };
    auto sq = [](const Vec2& p) { return p.x() * p.y() + p.y(); };
    CHECK(evaluate_K(manual_pair(mesh, data, sq, sq)) == 0.0);
    CHECK(evaluate_K(manual_pair(mesh, data, zero, x)) == doctest::Approx(1.0).epsilon(1e-12));
    data->gamma = CoefficientField::constant(2.0);
    CHECK(evaluate_K(manual_pair(mesh, data, zero, x)) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("topological gradient with consistent data vanishes") {
    auto mesh = square_mesh(0.05);
    auto data = std::make_shared<const ProblemData>(with_consistent_measurement(mesh, testing::reference_data()));
    const TopGradResult tg = topological_gradient(solve_pair(mesh, data));
    const GradientField g = recover_gradient(tg.pair.psi_N);
    double scale = 0.0;
    for (const Vec2& v : g.nodal) scale = std::max(scale, v.squaredNorm());
    CHECK(tg.deltaK.values.lpNorm<Eigen::Infinity>() <= 1e-6 * scale);
    CHECK(tg.K_value <= 1e-8);
}

TEST_CASE("interior mask excludes exactly the boundary nodes") {
    auto mesh = square_mesh(0.1);
    auto data = std::make_shared<ProblemData>(testing::reference_data());
    data->psi_m = [](const Vec2& p) { return p.x() * p.y(); };
    const TopGradResult tg = topological_gradient(solve_pair(mesh, data));
    const auto boundary = mesh->boundary_node_mask();
    for (int v = 0; v < mesh->num_nodes(); ++v) {
        CHECK(tg.interior[v] == !boundary[v]);
        CHECK(std::isfinite(tg.deltaK.values[v]));
        if (boundary[v]) CHECK(tg.deltaK.values[v] == 0.0);
    }
    CHECK(tg.K_value >= 0.0);
    CHECK(tg.interior[tg.argmin_node()]);
    CHECK(tg.min_value() == tg.deltaK.values[tg.argmin_node()]);
}

TEST_CASE("with F = 0 and gamma = 1 deltaK is the recovered-gradient difference") {
    auto mesh = square_mesh(0.1);
    auto data = std::make_shared<ProblemData>();
    const ForwardPair pair = manual_pair(
        mesh, data, [](const Vec2& p) { return std::sin(p.x()) * p.y(); },
        [](const Vec2& p) { return p.x() * p.x() - p.y(); });
    const TopGradResult tg = topological_gradient(pair);
    const GradientField gN = recover_gradient(pair.psi_N), gD = recover_gradient(pair.psi_D);
    for (int v = 0; v < mesh->num_nodes(); ++v)
        if (tg.interior[v]) CHECK(tg.deltaK.values[v] == gN.nodal[v].squaredNorm() - gD.nodal[v].squaredNorm());
}

TEST_CASE("general gradient specializations") {
    auto mesh = square_mesh(0.1);
    auto data = std::make_shared<ProblemData>(testing::reference_data());
    data->source = [](const Vec2& p) { return 1.0 + p.y(); };
    const ForwardPair pair = manual_pair(
        mesh, data, [](const Vec2& p) { return std::cos(p.x() + p.y()); },
        [](const Vec2& p) { return p.x() * p.y() + 0.2; });
    const TopGradResult disk = topological_gradient(pair);

    SUBCASE("M = 2 pi I with |omega| = pi is 2 pi times the disk field") {
        const TopGradResult g = general_topological_gradient(pair, 2.0 * kPi * Mat2::Identity(), kPi);
        for (int v = 0; v < mesh->num_nodes(); ++v)
            CHECK(g.deltaK.values[v] ==
                  doctest::Approx(2.0 * kPi * disk.deltaK.values[v]).epsilon(1e-12).scale(1e-300));
    }
    SUBCASE("M = 0 with |omega| = 0 is zero") {
        const TopGradResult g = general_topological_gradient(pair, Mat2::Zero(), 0.0);
        CHECK(g.deltaK.values.lpNorm<Eigen::Infinity>() == 0.0);
    }
    SUBCASE("non-symmetric M is rejected") {
        Mat2 M;
        M << 1.0, 0.5, 0.0, 1.0;
        CHECK_THROWS_AS(general_topological_gradient(pair, M, 1.0), Error);
    }
}

TEST_CASE("general gradient with diagonal M on uniform fields") {
    // grad psi_N = (1, 2), grad psi_D = (3, -1), gamma = 1, F = 0:
    // a*1 + b*4 - (a*9 + b*1) = -8a + 3b
    auto mesh = square_mesh(0.1);
    auto data = std::make_shared<ProblemData>();
    const ForwardPair pair = manual_pair(
        mesh, data, [](const Vec2& p) { return p.x() + 2.0 * p.y(); },
        [](const Vec2& p) { return 3.0 * p.x() - p.y(); });
    const double a = 2.5, b = 7.0;
    const TopGradResult g = general_topological_gradient(pair, Eigen::Vector2d(a, b).asDiagonal(), 1.0);
    for (int v = 0; v < mesh->num_nodes(); ++v)
        if (g.interior[v]) CHECK(g.deltaK.values[v] == doctest::Approx(-8.0 * a + 3.0 * b).epsilon(1e-10));
}

TEST_CASE("scaling flux, trace and source by 2 scales deltaK by 4") {
    auto mesh = square_mesh(0.05);
    ProblemData base = testing::reference_data();
    base.source = [](const Vec2& p) { return std::sin(3.0 * p.x()) + p.y(); };
    base.psi_m = [](const Vec2& p) { return p.x() + 0.2 * p.y() * p.y(); };
    ProblemData scaled = base;
    scaled.source = [f = base.source](const Vec2& p) { return 2.0 * f(p); };
    scaled.flux = [f = base.flux](const Vec2& p, const Vec2& n) { return 2.0 * f(p, n); };
    scaled.psi_m = [f = base.psi_m](const Vec2& p) { return 2.0 * f(p); };
    const TopGradResult t1 = topological_gradient(solve_pair(mesh, std::make_shared<const ProblemData>(base)));
    const TopGradResult t2 = topological_gradient(solve_pair(mesh, std::make_shared<const ProblemData>(scaled)));
    CHECK((t2.deltaK.values - 4.0 * t1.deltaK.values).lpNorm<Eigen::Infinity>() <=
          1e-10 * t1.deltaK.values.lpNorm<Eigen::Infinity>());
    CHECK(t2.K_value == doctest::Approx(4.0 * t1.K_value).epsilon(1e-10));
}

TEST_CASE("pointwise disk formula in two and three dimensions") {
    CHECK(disk_gradient_formula(2, 2.0, 3.0, 1.0, 0.0, 0.0, 0.0) == 4.0);
    CHECK(disk_gradient_formula(2, 1.0, 0.0, 0.0, 1.5, 2.0, 1.0) == -1.5);
    CHECK(disk_gradient_formula(3, 1.0, 0.0, 0.0, 1.5, 2.0, 1.0) == doctest::Approx(-2.0));
    CHECK(disk_gradient_formula(3, 2.0, 3.0, 1.0, 3.0, 1.0, 0.0) == doctest::Approx(4.0 - 4.0));
    CHECK_THROWS_AS(disk_gradient_formula(4, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0), Error);
}

TEST_CASE("boundary trace interpolates along GammaA edges") {
    auto mesh = square_mesh(0.1);
    const Eigen::VectorXd f = nodal(*mesh, [](const Vec2& p) { return 3.0 * p.x() + p.y(); });
    const BoundaryTrace trace(*mesh, f);
    CHECK(trace({0.43, 0.0}) == doctest::Approx(1.29).epsilon(1e-12));
    CHECK(trace({1.0, 0.77}) == doctest::Approx(3.77).epsilon(1e-12));
}

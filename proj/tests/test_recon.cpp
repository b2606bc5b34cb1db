#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "kvtopo/errors.hpp"
#include "kvtopo/recon.hpp"
#include "scenario.hpp"

using namespace kvtopo;
using namespace kvtopo::testing;

namespace {

const Scenario& scenario() {
    static const Scenario s = disk_scenario();
    return s;
}

std::vector<int> inside(const Mesh& m, const Shape& s) {
    std::vector<int> el;
    for (int t = 0; t < m.num_triangles(); ++t)
        if (shape_contains(s, m.centroid(t))) el.push_back(t);
    return el;
}

}  // namespace

TEST_CASE("threshold requires a negative level") {
    const TopGradResult& tg = scenario().tg;
    CHECK_THROWS_AS(threshold_object(tg, 0.0), Error);
    CHECK_THROWS_AS(threshold_object(tg, -0.0), Error);
    CHECK_THROWS_AS(threshold_object(tg, 0.5), Error);
}

TEST_CASE("threshold below the minimum is empty") {
    const TopGradResult& tg = scenario().tg;
    CHECK(threshold_object(tg, tg.min_value()).empty());
    CHECK(threshold_object(tg, 1.01 * tg.min_value()).empty());
}

TEST_CASE("thresholded sets are nested and use interior nodes only") {
    const TopGradResult& tg = scenario().tg;
    const Mesh& m = *tg.pair.mesh;
    std::vector<int> previous;
    for (double f : {0.9, 0.7, 0.5, 0.3, 0.1, 0.01}) {
        const double c = f * tg.min_value();
        const std::vector<int> current = threshold_object(tg, c);
        CHECK(std::is_sorted(current.begin(), current.end()));
        CHECK(std::includes(current.begin(), current.end(), previous.begin(), previous.end()));
        for (int t : current)
            for (int v : m.triangles[t]) {
                CHECK(tg.interior[v]);
                CHECK(tg.deltaK.values[v] < c);
            }
        previous = current;
    }
}

TEST_CASE("K on an empty object equals K on the full mesh") {
    const Scenario& s = scenario();
    CHECK(evaluate_K_on_punctured(*s.mesh, s.data, {}) == doctest::Approx(s.tg.K_value).epsilon(1e-12));
}

TEST_CASE("consistent data: removing a small object leaves a higher-order K") {
    // deltaK = 0, so K after removing a disk of radius rho is o(rho^2), not zero
    const Scenario& s = scenario();
    auto data = std::make_shared<const ProblemData>(with_consistent_measurement(s.mesh, reference_data()));
    const double k_large = evaluate_K_on_punctured(*s.mesh, data, inside(*s.mesh, Circle{{0.6, 0.6}, 0.12}));
    const double k_small = evaluate_K_on_punctured(*s.mesh, data, inside(*s.mesh, Circle{{0.6, 0.6}, 0.06}));
    CHECK(k_small > 0.0);
    CHECK(k_large / k_small >= 8.0);
}

TEST_CASE("removing the true disk drops K by at least 90%") {
    const Scenario& s = scenario();
    const double K = evaluate_K_on_punctured(*s.mesh, s.data, inside(*s.mesh, kTrueDisk));
    CHECK(K <= 0.1 * s.tg.K_value);
}

TEST_CASE("invalid objects are rejected") {
    const Scenario& s = scenario();
    const auto touching = inside(*s.mesh, Circle{{0.0, 0.5}, 0.1});
    CHECK_THROWS_AS(evaluate_K_on_punctured(*s.mesh, s.data, touching), GeometryError);
}

TEST_CASE("consistent data indicates no object") {
    const Scenario& s = scenario();
    auto data = std::make_shared<const ProblemData>(with_consistent_measurement(s.mesh, reference_data()));
    const TopGradResult tg = topological_gradient(solve_pair(s.mesh, data));
    const Reconstruction r = reconstruct(tg);
    CHECK_FALSE(r.indicated());
    CHECK(r.object_elements.empty());
    CHECK(r.K_after == r.K_before);
}

TEST_CASE("reconstruction selects the minimal K_after and is deterministic") {
    const Scenario& s = scenario();
    const Reconstruction r = reconstruct(s.tg);
    REQUIRE(r.indicated());
    CHECK(*r.chosen_c < 0.0);
    CHECK(r.K_after <= r.K_before);
    CHECK_FALSE(r.object_elements.empty());
    CHECK(r.candidates.size() == kDefaultFractions.size());
    for (const auto& c : r.candidates)
        if (c.valid) CHECK(r.K_after <= c.K_after);
    CHECK(r.components == count_components(*s.mesh, r.object_elements));

    const Reconstruction again = reconstruct(s.tg);
    CHECK(again.object_elements == r.object_elements);
    CHECK(again.K_after == r.K_after);
    CHECK(*again.chosen_c == *r.chosen_c);
}

TEST_CASE("ties in K_after go to the larger |c|") {
    // every level in (min, 0) selects the same triangles, so all candidates tie exactly
    const Scenario& s = scenario();
    TopGradResult tg = s.tg;
    tg.deltaK.values.setZero();
    for (int v = 0; v < s.mesh->num_nodes(); ++v)
        if (tg.interior[v] && shape_contains(kTrueDisk, s.mesh->nodes[v])) tg.deltaK.values[v] = -1.0;
    const Reconstruction r = reconstruct(tg, {0.2, 0.8, 0.5});
    REQUIRE(r.indicated());
    for (const auto& c : r.candidates) CHECK(c.K_after == r.candidates.front().K_after);
    CHECK(*r.chosen_c == doctest::Approx(-0.8));
}

TEST_CASE("candidate fractions must lie in (0, 1]") {
    CHECK_THROWS_AS(reconstruct(scenario().tg, {0.0}), Error);
    CHECK_THROWS_AS(reconstruct(scenario().tg, {1.5}), Error);
}

TEST_CASE("jaccard index") {
    const Scenario& s = scenario();
    const Mesh& m = *s.mesh;
    std::vector<int> all(m.num_triangles());
    for (int t = 0; t < m.num_triangles(); ++t) all[t] = t;
    const Polygon whole{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    CHECK(jaccard(m, all, whole) == doctest::Approx(1.0).epsilon(1e-12));

    const auto disk = inside(m, kTrueDisk);
    CHECK(jaccard(m, disk, kTrueDisk) >= 0.9);
    CHECK(jaccard(m, disk, Circle{{0.7, 0.7}, 0.15}) == 0.0);
    CHECK(jaccard(m, {}, kTrueDisk) == 0.0);
}

TEST_CASE("area centroid and component count") {
    const Scenario& s = scenario();
    const Mesh& m = *s.mesh;
    auto a = inside(m, Circle{{0.3, 0.3}, 0.08});
    const auto b = inside(m, Circle{{0.7, 0.7}, 0.08});
    CHECK(count_components(m, a) == 1);
    const Vec2 ca = *area_centroid(m, a);
    CHECK((ca - Vec2(0.3, 0.3)).norm() <= 0.02);
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    CHECK(count_components(m, a) == 2);
    CHECK_FALSE(area_centroid(m, {}));
    CHECK(count_components(m, {}) == 0);
}

// Pipeline-level claims on the disk scenario at (0.3, 0.2), r = 0.15.
#include <cmath>

#include "doctest.h"
#include "kvtopo/asymp.hpp"
#include "kvtopo/recon.hpp"
#include "scenario.hpp"

using namespace kvtopo;
using namespace kvtopo::testing;

TEST_CASE("deltaK minimum lies within 2 h of the true center") {
    const Scenario s = disk_scenario();
    const Vec2 z = s.mesh->nodes[s.tg.argmin_node()];
    INFO("argmin (" << z.x() << ", " << z.y() << ")");
    CHECK((z - kTrueDisk.center).norm() <= 2.0 * kInversionH);
}

TEST_CASE("half-minimum level set contains the node closest to the true center") {
    const Scenario s = disk_scenario();
    int closest = 0;
    for (int v = 1; v < s.mesh->num_nodes(); ++v)
        if ((s.mesh->nodes[v] - kTrueDisk.center).norm() < (s.mesh->nodes[closest] - kTrueDisk.center).norm())
            closest = v;
    const auto el = threshold_object(s.tg, 0.5 * s.tg.min_value());
    CHECK_FALSE(el.empty());
    bool contains = false;
    for (int t : el)
        for (int v : s.mesh->triangles[t]) contains = contains || v == closest;
    CHECK(contains);
}

TEST_CASE("reconstructed center lies within 2 h of the true center") {
    const Scenario s = disk_scenario();
    Reconstruction r = reconstruct(s.tg);
    score(r, *s.mesh, kTrueDisk);
    REQUIRE(r.indicated());
    CHECK(*r.center_error <= 2.0 * kInversionH);
}

TEST_CASE("refining the inversion mesh moves each sweep ratio toward 1") {
    // fixed data synthesized at h_true = 0.005; z is the criterion-3 sweep point
    const std::vector<double> eps{0.1, 0.07, 0.05, 0.035, 0.025};
    const std::vector<double> levels{0.08, 0.04, 0.02, 0.01};
    const Scenario reference = disk_scenario(0.0, 1, kInversionH);
    const Vec2 z = reference.mesh->nodes[admissible_argmin(reference.tg, reference.spec, sweep_clearance(eps))];
    std::vector<SweepReport> reports;
    for (double h : levels) {
        const Scenario s = disk_scenario(0.0, 1, h, 0.005);
        reports.push_back(sweep(s.spec, s.tg, z, eps));
        REQUIRE(reports.back().eps_list == eps);
    }
    for (std::size_t l = 1; l < levels.size(); ++l)
        for (std::size_t i = 0; i < eps.size(); ++i) {
            const double coarse = *reports[l - 1].ratios[i], fine = *reports[l].ratios[i];
            INFO("eps " << eps[i] << ": ratio " << coarse << " at h=" << levels[l - 1] << ", " << fine
                        << " at h=" << levels[l]);
            CHECK(std::abs(fine - 1.0) < std::abs(coarse - 1.0));
        }
}

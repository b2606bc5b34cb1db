#pragma once

#include <algorithm>
#include <memory>

#include "kvtopo/kv.hpp"
#include "kvtopo/synth.hpp"

namespace kvtopo::testing {

inline constexpr double kInversionH = 0.02;
inline constexpr double kTrueH = 0.01;
inline const Circle kTrueDisk{{0.3, 0.2}, 0.15};

/// gamma = 1 + 0.5 x, F = 0, flux of the uniform field (1, 0): gamma n_x.
inline ProblemData reference_data() {
    ProblemData d;
    d.gamma = {[](const Vec2& p) { return 1.0 + 0.5 * p.x(); }, 1.0, 1.5};
    d.flux = [](const Vec2& p, const Vec2& n) { return (1.0 + 0.5 * p.x()) * n.x(); };
    return d;
}

/// Unit square, GammaI the left side, GammaA the other three.
inline DomainSpec unit_square(double h) {
    DomainSpec spec;
    spec.shape = RectDomain{};
    spec.h = h;
    return spec;
}

struct Scenario {
    DomainSpec spec;
    std::shared_ptr<const Mesh> mesh;
    std::shared_ptr<const ProblemData> data;
    TopGradResult tg;
};

/// Disk object at (0.3, 0.2) with r = 0.15, synthesized at min(h_true, h_inv / 2) and inverted at h_inv.
inline Scenario disk_scenario(double noise = 0.0, std::uint64_t seed = 1, double h_inv = kInversionH,
                              double h_true = kTrueH) {
    Scenario s;
    s.spec = unit_square(h_inv);
    TrueScene scene;
    scene.domain = s.spec;
    scene.object = kTrueDisk;
    scene.data = reference_data();
    scene.h_true = std::min(h_true, h_inv / 2.0);
    auto data = std::make_shared<ProblemData>(scene.data);
    data->psi_m = measurement_function(generate_measurement(scene, noise, seed), s.spec);
    s.data = data;
    s.mesh = std::make_shared<const Mesh>(generate_mesh(s.spec));
    s.tg = topological_gradient(solve_pair(s.mesh, s.data));
    return s;
}

}  // namespace kvtopo::testing

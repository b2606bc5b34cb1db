#include "kvtopo/recon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <unordered_map>

#include "kvtopo/errors.hpp"

namespace kvtopo {

std::vector<int> threshold_object(const TopGradResult& tg, double c) {
    if (!(c < 0.0)) throw Error("threshold level c must be strictly negative");
    const Mesh& mesh = *tg.pair.mesh;
    std::vector<int> out;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        bool inside = true;
        for (int v : mesh.triangles[t]) inside = inside && tg.interior[v] && tg.deltaK.values[v] < c;
        if (inside) out.push_back(t);
    }
    return out;
}

double evaluate_K_on_punctured(const Mesh& mesh, std::shared_ptr<const ProblemData> data,
                               const std::vector<int>& elements, const SolverOptions& opts) {
    std::shared_ptr<const Mesh> m;
    if (elements.empty())
        m = std::make_shared<const Mesh>(mesh);
    else
        m = std::make_shared<const Mesh>(remove_elements(mesh, elements).mesh);
    return evaluate_K(solve_pair(m, std::move(data), opts));
}

std::optional<Vec2> area_centroid(const Mesh& mesh, const std::vector<int>& elements) {
    double area = 0.0;
    Vec2 c = Vec2::Zero();
    for (int t : elements) {
        const double a = mesh.area(t);
        area += a;
        c += a * mesh.centroid(t);
    }
    if (!(area > 0.0)) return std::nullopt;
    return c / area;
}

int count_components(const Mesh& mesh, const std::vector<int>& elements) {
    std::vector<int> parent(elements.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    std::unordered_map<std::uint64_t, int> first_owner;
    for (std::size_t k = 0; k < elements.size(); ++k) {
        const auto& tri = mesh.triangles[elements[k]];
        for (int e = 0; e < 3; ++e) {
            int a = tri[e], b = tri[(e + 1) % 3];
            if (a > b) std::swap(a, b);
            const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
            const auto [it, fresh] = first_owner.emplace(key, static_cast<int>(k));
            if (!fresh) parent[find(static_cast<int>(k))] = find(it->second);
        }
    }
    int n = 0;
    for (std::size_t k = 0; k < elements.size(); ++k) n += find(static_cast<int>(k)) == static_cast<int>(k);
    return n;
}

namespace {

constexpr int kSubdivisions = 6;  // 6x6 sub-triangles = kJaccardSamples

// fraction of the triangle's sub-triangle centroids inside the shape
double inside_fraction(const Mesh& mesh, int t, const Shape& shape) {
    const auto& tri = mesh.triangles[t];
    const Vec2& a = mesh.nodes[tri[0]];
    const Vec2 e1 = mesh.nodes[tri[1]] - a;
    const Vec2 e2 = mesh.nodes[tri[2]] - a;
    constexpr double k = kSubdivisions;
    int hits = 0;
    for (int i = 0; i < kSubdivisions; ++i) {
        for (int j = 0; i + j < kSubdivisions; ++j) {
            hits += shape_contains(shape, a + (i + 1.0 / 3.0) / k * e1 + (j + 1.0 / 3.0) / k * e2);
            if (i + j < kSubdivisions - 1)
                hits += shape_contains(shape, a + (i + 2.0 / 3.0) / k * e1 + (j + 2.0 / 3.0) / k * e2);
        }
    }
    return static_cast<double>(hits) / kJaccardSamples;
}

}  // namespace

double jaccard(const Mesh& mesh, const std::vector<int>& elements, const Shape& truth) {
    std::vector<bool> selected(mesh.triangles.size(), false);
    for (int t : elements) selected[t] = true;
    double a_area = 0.0, b_area = 0.0, both = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double area = mesh.area(t);
        const double in_b = inside_fraction(mesh, t, truth) * area;
        b_area += in_b;
        if (selected[t]) {
            a_area += area;
            both += in_b;
        }
    }
    const double uni = a_area + b_area - both;
    return uni > 0.0 ? both / uni : 0.0;
}

void score(Reconstruction& r, const Mesh& mesh, const Shape& truth) {
    r.jaccard = jaccard(mesh, r.object_elements, truth);
    if (r.center_estimate) r.center_error = (*r.center_estimate - shape_center(truth)).norm();
}

Reconstruction reconstruct(const TopGradResult& tg, const std::vector<double>& fractions, const SolverOptions& opts) {
    for (double f : fractions)
        if (!(f > 0.0 && f <= 1.0)) throw Error("candidate fractions must lie in (0, 1]");
    const Mesh& mesh = *tg.pair.mesh;
    Reconstruction r;
    r.K_before = tg.K_value;
    r.K_after = tg.K_value;
    const double min_dk = tg.min_value();
    if (!(min_dk < 0.0)) return r;  // no object indicated

    int best = -1;
    for (double f : fractions) {
        CandidateResult cand;
        cand.fraction = f;
        cand.c = f * min_dk;
        const auto elements = threshold_object(tg, cand.c);
        cand.n_elements = static_cast<int>(elements.size());
        if (!elements.empty()) {
            try {
                cand.K_after = evaluate_K_on_punctured(mesh, tg.pair.data, elements, opts);
                cand.valid = true;
            } catch (const GeometryError&) {
                cand.valid = false;
            }
        }
        r.candidates.push_back(cand);
        if (!cand.valid) continue;
        const int idx = static_cast<int>(r.candidates.size()) - 1;
        if (best < 0) {
            best = idx;
            continue;
        }
        const CandidateResult& b = r.candidates[best];
        const double tol = 1e-12 * std::max({1.0, std::abs(b.K_after), std::abs(cand.K_after)});
        if (cand.K_after < b.K_after - tol ||
            (std::abs(cand.K_after - b.K_after) <= tol && std::abs(cand.c) > std::abs(b.c)))
            best = idx;
    }
    if (best < 0 || r.candidates[best].K_after > r.K_before) return r;

    const CandidateResult& b = r.candidates[best];
    r.chosen_c = b.c;
    r.object_elements = threshold_object(tg, b.c);
    r.K_after = b.K_after;
    r.center_estimate = area_centroid(mesh, r.object_elements);
    r.components = count_components(mesh, r.object_elements);
    return r;
}

}  // namespace kvtopo

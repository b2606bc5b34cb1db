#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "kvtopo/kv.hpp"

namespace kvtopo {

/// Triangles whose three nodes are interior with deltaK < c. Requires c < 0.
std::vector<int> threshold_object(const TopGradResult& tg, double c);

/// K on the mesh with `elements` removed (exposed edges become Sigma).
/// Throws GeometryError for objects touching the boundary or disconnecting
/// the mesh. An empty set gives K on the unmodified mesh.
double evaluate_K_on_punctured(const Mesh& mesh, std::shared_ptr<const ProblemData> data,
                               const std::vector<int>& elements, const SolverOptions& opts = {});

struct CandidateResult {
    double fraction = 0.0;
    double c = 0.0;
    int n_elements = 0;
    bool valid = false;
    double K_after = 0.0;  // meaningful only when valid
};

struct Reconstruction {
    std::optional<double> chosen_c;  // empty when no object is indicated
    std::vector<int> object_elements;
    double K_before = 0.0;
    double K_after = 0.0;
    std::optional<Vec2> center_estimate;
    int components = 0;
    std::vector<CandidateResult> candidates;
    std::optional<double> jaccard;
    std::optional<double> center_error;

    bool indicated() const { return chosen_c.has_value(); }
};

inline const std::vector<double> kDefaultFractions{0.2, 0.4, 0.6, 0.8};

/// Scans c = fraction * min deltaK and keeps the valid candidate with the
/// smallest K_after; ties within 1e-12 go to the larger |c|. Returns an empty
/// reconstruction (K_after = K_before) when min deltaK >= 0 or no candidate
/// lowers K.
Reconstruction reconstruct(const TopGradResult& tg, const std::vector<double>& fractions = kDefaultFractions,
                           const SolverOptions& opts = {});

/// Area-weighted centroid of a triangle set.
std::optional<Vec2> area_centroid(const Mesh& mesh, const std::vector<int>& elements);

/// Number of edge-connected components of a triangle set.
int count_components(const Mesh& mesh, const std::vector<int>& elements);

/// Number of sub-triangle samples per triangle used by jaccard.
inline constexpr int kJaccardSamples = 36;

/// |A n B| / |A u B| between a triangle set and a shape, by sampling each
/// triangle at the centroids of its uniform 6x6 sub-triangulation. The
/// shape's area is sampled the same way over the whole mesh.
double jaccard(const Mesh& mesh, const std::vector<int>& elements, const Shape& truth);

/// Adds the jaccard and center-error metrics against a known shape.
void score(Reconstruction& r, const Mesh& mesh, const Shape& truth);

}  // namespace kvtopo

#pragma once

#include <array>
#include <vector>

#include "kvtopo/mesh.hpp"

namespace kvtopo::detail {

struct Segment {
    int a = 0;
    int b = 0;
    BoundaryTag tag = BoundaryTag::GammaI;
    int owner = -1;  // -1: outer boundary, k >= 0: hole k
};

/// Delaunay triangulation (CCW triangles) of `points` that contains every
/// segment as an edge. Segments missing from the triangulation are split at
/// their midpoints, so both vectors may grow.
std::vector<std::array<int, 3>> conforming_delaunay(std::vector<Vec2>& points, std::vector<Segment>& segments);

}  // namespace kvtopo::detail

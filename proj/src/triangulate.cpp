#include "triangulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_set>

#include <boost/polygon/voronoi.hpp>

#include "kvtopo/errors.hpp"

namespace kvtopo::detail {

namespace bp = boost::polygon;

namespace {

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

// Delaunay triangles as the dual of the Voronoi diagram. Sites are snapped to
// a 2^30 integer grid so the diagram is built with exact predicates; the
// caller keeps the original coordinates.
std::vector<std::array<int, 3>> delaunay(const std::vector<Vec2>& pts) {
    Vec2 lo = pts.front(), hi = pts.front();
    for (const Vec2& p : pts) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const double extent = std::max((hi - lo).maxCoeff(), 1e-300);
    const double scale = static_cast<double>(1 << 30) / extent;

    std::vector<bp::point_data<int>> sites;
    sites.reserve(pts.size());
    std::unordered_set<std::uint64_t> seen;
    for (const Vec2& p : pts) {
        const auto x = static_cast<int>(std::llround((p.x() - lo.x()) * scale));
        const auto y = static_cast<int>(std::llround((p.y() - lo.y()) * scale));
        if (!seen.insert((static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
                         static_cast<std::uint32_t>(y))
                 .second)
            throw GeometryError("triangulation: coincident points");
        sites.emplace_back(x, y);
    }

    bp::voronoi_diagram<double> vd;
    bp::construct_voronoi(sites.begin(), sites.end(), &vd);

    std::vector<std::array<int, 3>> tris;
    tris.reserve(2 * pts.size());
    std::vector<int> ring;
    for (const auto& vertex : vd.vertices()) {
        ring.clear();
        const auto* e = vertex.incident_edge();
        do {
            ring.push_back(static_cast<int>(e->cell()->source_index()));
            e = e->rot_next();
        } while (e != vertex.incident_edge());
        if (ring.size() > 3) {
            // cocircular sites: order by angle around the circumcenter
            const Vec2 c((vertex.x()) / scale + lo.x(), (vertex.y()) / scale + lo.y());
            std::sort(ring.begin(), ring.end(), [&](int i, int j) {
                return std::atan2(pts[i].y() - c.y(), pts[i].x() - c.x()) <
                       std::atan2(pts[j].y() - c.y(), pts[j].x() - c.x());
            });
        }
        for (std::size_t k = 1; k + 1 < ring.size(); ++k) {
            std::array<int, 3> t{ring[0], ring[k], ring[k + 1]};
            if (orient(pts[t[0]], pts[t[1]], pts[t[2]]) < 0.0) std::swap(t[1], t[2]);
            tris.push_back(t);
        }
    }
    return tris;
}

}  // namespace

std::vector<std::array<int, 3>> conforming_delaunay(std::vector<Vec2>& points, std::vector<Segment>& segments) {
    if (points.size() < 3) throw GeometryError("triangulation: need at least 3 points");
    for (int round = 0; round < 32; ++round) {
        auto tris = delaunay(points);
        std::unordered_set<std::uint64_t> edges;
        edges.reserve(3 * tris.size());
        for (const auto& t : tris)
            for (int k = 0; k < 3; ++k) edges.insert(edge_key(t[k], t[(k + 1) % 3]));

        std::vector<Segment> next;
        next.reserve(segments.size());
        bool split = false;
        for (const Segment& s : segments) {
            if (edges.count(edge_key(s.a, s.b))) {
                next.push_back(s);
                continue;
            }
            split = true;
            const int m = static_cast<int>(points.size());
            points.push_back(0.5 * (points[s.a] + points[s.b]));
            next.push_back({s.a, m, s.tag, s.owner});
            next.push_back({m, s.b, s.tag, s.owner});
        }
        segments = std::move(next);
        if (!split) return tris;
    }
    throw GeometryError("triangulation: segment recovery did not converge");
}

}  // namespace kvtopo::detail

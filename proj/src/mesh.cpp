#include "kvtopo/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "kvtopo/errors.hpp"
#include "triangulate.hpp"

namespace kvtopo {

std::string_view tag_name(BoundaryTag tag) {
    switch (tag) {
        case BoundaryTag::GammaA: return "GAMMA_A";
        case BoundaryTag::GammaI: return "GAMMA_I";
        case BoundaryTag::Sigma: return "SIGMA";
    }
    return "?";
}

std::optional<BoundaryTag> parse_tag(std::string_view name) {
    if (name == "GAMMA_A") return BoundaryTag::GammaA;
    if (name == "GAMMA_I") return BoundaryTag::GammaI;
    if (name == "SIGMA") return BoundaryTag::Sigma;
    return std::nullopt;
}

namespace {

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

// undirected edge -> triangles using it
std::unordered_map<std::uint64_t, std::vector<int>> edge_triangles(const Mesh& m) {
    std::unordered_map<std::uint64_t, std::vector<int>> map;
    map.reserve(3 * m.triangles.size());
    for (int t = 0; t < m.num_triangles(); ++t) {
        const auto& tri = m.triangles[t];
        for (int k = 0; k < 3; ++k) map[edge_key(tri[k], tri[(k + 1) % 3])].push_back(t);
    }
    return map;
}

}  // namespace

double Mesh::area(int t) const {
    const auto& tri = triangles[t];
    return 0.5 * orient(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
}

Vec2 Mesh::centroid(int t) const {
    const auto& tri = triangles[t];
    return (nodes[tri[0]] + nodes[tri[1]] + nodes[tri[2]]) / 3.0;
}

double Mesh::total_area() const {
    double a = 0.0;
    for (int t = 0; t < num_triangles(); ++t) a += area(t);
    return a;
}

double Mesh::max_edge_length() const {
    double m = 0.0;
    for (const auto& tri : triangles)
        for (int k = 0; k < 3; ++k) m = std::max(m, (nodes[tri[k]] - nodes[tri[(k + 1) % 3]]).norm());
    return m;
}

std::vector<bool> Mesh::boundary_node_mask() const {
    std::vector<bool> mask(nodes.size(), false);
    for (const auto& e : boundary) mask[e.a] = mask[e.b] = true;
    return mask;
}

bool Mesh::has_tag(BoundaryTag tag) const {
    return std::any_of(boundary.begin(), boundary.end(), [tag](const BoundaryEdge& e) { return e.tag == tag; });
}

bool Mesh::operator==(const Mesh& other) const {
    if (nodes.size() != other.nodes.size()) return false;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].x() != other.nodes[i].x() || nodes[i].y() != other.nodes[i].y()) return false;
    return triangles == other.triangles && boundary == other.boundary;
}

void validate(const Mesh& mesh, double min_area) {
    const int nv = mesh.num_nodes();
    if (mesh.triangles.empty()) throw GeometryError("mesh has no triangles");
    for (const Vec2& p : mesh.nodes)
        if (!std::isfinite(p.x()) || !std::isfinite(p.y())) throw GeometryError("non-finite node coordinate");
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int v : tri)
            if (v < 0 || v >= nv) throw GeometryError("triangle " + std::to_string(t) + " references missing node");
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw GeometryError("triangle " + std::to_string(t) + " repeats a node");
        const double a = mesh.area(t);
        if (a < 0.0) throw GeometryError("triangle " + std::to_string(t) + " has negative area");
        if (a <= min_area) throw GeometryError("triangle " + std::to_string(t) + " is degenerate");
    }

    const auto et = edge_triangles(mesh);
    std::unordered_map<std::uint64_t, int> bnd;
    for (std::size_t i = 0; i < mesh.boundary.size(); ++i) {
        const auto& e = mesh.boundary[i];
        if (e.a < 0 || e.a >= nv || e.b < 0 || e.b >= nv)
            throw GeometryError("boundary edge " + std::to_string(i) + " references missing node");
        if (!bnd.emplace(edge_key(e.a, e.b), static_cast<int>(i)).second)
            throw GeometryError("boundary edge " + std::to_string(i) + " is duplicated");
        const auto it = et.find(edge_key(e.a, e.b));
        if (it == et.end() || it->second.size() != 1)
            throw GeometryError("boundary edge " + std::to_string(i) + " does not belong to exactly one triangle");
    }
    // Every edge is shared by at most two triangles and edges with a single
    // triangle are exactly the boundary edges (no hanging nodes).
    for (const auto& [key, ts] : et) {
        if (ts.size() > 2) throw GeometryError("non-conforming mesh: edge shared by more than two triangles");
        if (ts.size() == 1 && !bnd.count(key)) throw GeometryError("non-conforming mesh: free edge not tagged as boundary");
    }
    // The area enclosed by the boundary must match the triangle area; overlaps
    // or folded elements break this.
    double enclosed = 0.0;
    for (const auto& e : mesh.boundary) {
        const int t = et.at(edge_key(e.a, e.b)).front();
        const auto& tri = mesh.triangles[t];
        int a = e.a, b = e.b;
        for (int k = 0; k < 3; ++k)
            if (tri[k] == e.b && tri[(k + 1) % 3] == e.a) std::swap(a, b);
        const Vec2& p = mesh.nodes[a];
        const Vec2& q = mesh.nodes[b];
        enclosed += 0.5 * (p.x() * q.y() - q.x() * p.y());
    }
    const double total = mesh.total_area();
    if (std::abs(enclosed - total) > 1e-9 * std::max(1.0, std::abs(total)))
        throw GeometryError("overlapping triangles: element area does not match the boundary enclosure");
}

// ---------------------------------------------------------------------------
// Domains

namespace {

// odd counts: resolutions h and h/2 then share only the piece endpoints
int segments_for(double length, double h) {
    const int n = std::max(1, static_cast<int>(std::ceil(length / h - 1e-12)));
    return n | 1;
}

void check_domain(const DomainSpec& spec) {
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, DiskDomain>) {
                if (!(d.radius > 0.0)) throw GeometryError("disk radius must be positive");
                if (!(spec.h > 0.0) || spec.h >= d.radius) throw GeometryError("need 0 < h < radius");
                const auto& a = d.gamma_a;
                if (!(a.begin >= 0.0 && a.end <= 2.0 * kPi && a.begin < a.end))
                    throw GeometryError("GammaA arc must satisfy 0 <= begin < end <= 2*pi");
                if (a.end - a.begin >= 2.0 * kPi - 1e-12)
                    throw GeometryError("GammaA arc must be a strict subset of the circle");
            } else {
                if (!(d.width > 0.0 && d.height > 0.0)) throw GeometryError("rectangle sides must be positive");
                if (!(spec.h > 0.0) || spec.h >= std::min(d.width, d.height))
                    throw GeometryError("need 0 < h < min(width, height)");
                const int n = static_cast<int>(std::count(d.gamma_a.begin(), d.gamma_a.end(), true));
                if (n == 0 || n == 4) throw GeometryError("GammaA must cover some but not all rectangle sides");
            }
        },
        spec.shape);
}

std::array<Vec2, 4> corners(const RectDomain& r) {
    return {r.origin, r.origin + Vec2(r.width, 0.0), r.origin + Vec2(r.width, r.height),
            r.origin + Vec2(0.0, r.height)};
}

}  // namespace

OuterBoundary outer_boundary(const DomainSpec& spec) {
    check_domain(spec);
    OuterBoundary ob;
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, DiskDomain>) {
                // arcs [begin,end) -> GammaA, [end, begin+2pi) -> GammaI; vertices at both ends
                const double a0 = d.gamma_a.begin, a1 = d.gamma_a.end;
                const int na = segments_for(d.radius * (a1 - a0), spec.h);
                const int ni = segments_for(d.radius * (2.0 * kPi - (a1 - a0)), spec.h);
                for (int k = 0; k < na; ++k) {
                    const double t = a0 + (a1 - a0) * k / na;
                    ob.points.push_back(d.center + d.radius * Vec2(std::cos(t), std::sin(t)));
                    ob.tags.push_back(BoundaryTag::GammaA);
                }
                for (int k = 0; k < ni; ++k) {
                    const double t = a1 + (2.0 * kPi - (a1 - a0)) * k / ni;
                    ob.points.push_back(d.center + d.radius * Vec2(std::cos(t), std::sin(t)));
                    ob.tags.push_back(BoundaryTag::GammaI);
                }
            } else {
                const auto c = corners(d);
                for (int s = 0; s < 4; ++s) {
                    const Vec2& p = c[s];
                    const Vec2& q = c[(s + 1) % 4];
                    const int n = segments_for((q - p).norm(), spec.h);
                    for (int k = 0; k < n; ++k) {
                        ob.points.push_back(k == 0 ? p : Vec2(p + (q - p) * (static_cast<double>(k) / n)));
                        ob.tags.push_back(d.gamma_a[s] ? BoundaryTag::GammaA : BoundaryTag::GammaI);
                    }
                }
            }
        },
        spec.shape);
    return ob;
}

double arc_parameter(const DomainSpec& spec, const Vec2& p) {
    return std::visit(
        [&](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, DiskDomain>) {
                double t = std::atan2(p.y() - d.center.y(), p.x() - d.center.x());
                if (t < 0.0) t += 2.0 * kPi;
                return d.radius * t;
            } else {
                const auto c = corners(d);
                double best = std::numeric_limits<double>::infinity(), s = 0.0, offset = 0.0;
                for (int k = 0; k < 4; ++k) {
                    const Vec2& a = c[k];
                    const Vec2& b = c[(k + 1) % 4];
                    const double len = (b - a).norm();
                    const double t = std::clamp((p - a).dot(b - a) / (len * len), 0.0, 1.0);
                    const double dist = (p - (a + t * (b - a))).norm();
                    if (dist < best - 1e-14) {
                        best = dist;
                        s = offset + t * len;
                    }
                    offset += len;
                }
                return s;
            }
        },
        spec.shape);
}

double domain_area(const DomainSpec& spec) {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, DiskDomain>) return kPi * d.radius * d.radius;
            else return d.width * d.height;
        },
        spec.shape);
}

bool domain_contains(const DomainSpec& spec, const Vec2& p) {
    return std::visit(
        [&](const auto& d) -> bool {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, DiskDomain>) {
                return (p - d.center).norm() < d.radius;
            } else {
                const Vec2 q = p - d.origin;
                return q.x() > 0.0 && q.y() > 0.0 && q.x() < d.width && q.y() < d.height;
            }
        },
        spec.shape);
}

double distance_to_boundary(const DomainSpec& spec, const Vec2& p) {
    return std::visit(
        [&](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, DiskDomain>) {
                return d.radius - (p - d.center).norm();
            } else {
                const Vec2 q = p - d.origin;
                return std::min({q.x(), q.y(), d.width - q.x(), d.height - q.y()});
            }
        },
        spec.shape);
}

void check_clearance(const DomainSpec& spec, const Perturbation& hole) {
    if (!(hole.eps > 0.0)) throw GeometryError("perturbation radius must be positive");
    if (hole.n_segments < 12) throw GeometryError("perturbation needs at least 12 segments");
    if (!domain_contains(spec, hole.center) || distance_to_boundary(spec, hole.center) - hole.eps < 2.0 * hole.eps)
        throw GeometryError("perturbation violates the clearance condition (distance to boundary < 2*eps)");
}

// ---------------------------------------------------------------------------
// Generation

namespace {

constexpr double kProximity = 0.6;  // min distance between points, in units of local spacing
constexpr double kGrowth = 1.2;     // spacing ratio between successive layers around a hole

struct HoleInput {
    std::vector<Vec2> polygon;  // CCW, edges no longer than `spacing`
    double spacing = 0.0;
    bool fill = false;
    std::optional<Circle> disk;  // enables the concentric fill pattern
};

class SpatialHash {
public:
    explicit SpatialHash(double cell) : cell_(cell) {}

    void insert(const Vec2& p, int id) { cells_[key(cell_of(p.x()), cell_of(p.y()))].push_back(id); }

    template <class F>
    void visit(const Vec2& p, double radius, F&& f) const {
        const long long x0 = cell_of(p.x() - radius), x1 = cell_of(p.x() + radius);
        const long long y0 = cell_of(p.y() - radius), y1 = cell_of(p.y() + radius);
        for (long long x = x0; x <= x1; ++x)
            for (long long y = y0; y <= y1; ++y) {
                const auto it = cells_.find(key(x, y));
                if (it == cells_.end()) continue;
                for (int id : it->second)
                    if (f(id)) return;
            }
    }

private:
    long long cell_of(double v) const { return static_cast<long long>(std::floor(v / cell_)); }
    static std::uint64_t key(long long x, long long y) {
        return (static_cast<std::uint64_t>(x) << 32) ^ static_cast<std::uint64_t>(y & 0xffffffffLL);
    }

    double cell_;
    std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

struct Generated {
    std::vector<Vec2> points;
    std::vector<detail::Segment> segments;
    std::vector<std::array<int, 3>> triangles;
    std::vector<int> triangle_hole;  // -1 outside every hole, else hole index
};

Generated generate(const DomainSpec& spec, const std::vector<HoleInput>& holes) {
    const OuterBoundary ob = outer_boundary(spec);
    const double h = spec.h;

    Generated g;
    std::vector<double> size;
    double max_seg = 0.0;
    const int nb = static_cast<int>(ob.points.size());
    for (int i = 0; i < nb; ++i) {
        g.points.push_back(ob.points[i]);
        size.push_back(h);
        g.segments.push_back({i, (i + 1) % nb, ob.tags[i], -1});
        max_seg = std::max(max_seg, (ob.points[(i + 1) % nb] - ob.points[i]).norm());
    }
    for (int k = 0; k < static_cast<int>(holes.size()); ++k) {
        const auto& poly = holes[k].polygon;
        const int base = static_cast<int>(g.points.size());
        const int n = static_cast<int>(poly.size());
        for (int i = 0; i < n; ++i) {
            g.points.push_back(poly[i]);
            size.push_back(holes[k].spacing);
            // hole boundary is traversed clockwise with respect to the domain
            g.segments.push_back({base + (i + 1) % n, base + i, BoundaryTag::Sigma, k});
            max_seg = std::max(max_seg, (poly[(i + 1) % n] - poly[i]).norm());
        }
    }

    SpatialHash near(kProximity * h);
    for (int i = 0; i < static_cast<int>(g.points.size()); ++i) near.insert(g.points[i], i);
    SpatialHash segs(std::max(max_seg, 1e-12));
    for (int i = 0; i < static_cast<int>(g.segments.size()); ++i)
        segs.insert(0.5 * (g.points[g.segments[i].a] + g.points[g.segments[i].b]), i);

    auto try_add = [&](const Vec2& q, double s, int inside_hole) {
        if (distance_to_boundary(spec, q) < 0.5 * s) return;
        for (int k = 0; k < static_cast<int>(holes.size()); ++k) {
            if (k == inside_hole) continue;
            if (point_in_polygon(holes[k].polygon, q)) return;
        }
        bool reject = false;
        near.visit(q, kProximity * h, [&](int id) {
            if ((g.points[id] - q).norm() < kProximity * std::max(s, size[id])) reject = true;
            return reject;
        });
        if (reject) return;
        // keep diametral circles of constraint segments empty (with margin)
        segs.visit(q, 0.55 * max_seg, [&](int id) {
            const Vec2& a = g.points[g.segments[id].a];
            const Vec2& b = g.points[g.segments[id].b];
            if ((q - 0.5 * (a + b)).norm() < 0.55 * (b - a).norm()) reject = true;
            return reject;
        });
        if (reject) return;
        near.insert(q, static_cast<int>(g.points.size()));
        g.points.push_back(q);
        size.push_back(s);
    };

    for (int k = 0; k < static_cast<int>(holes.size()); ++k) {
        const auto& hole = holes[k];
        const auto& poly = hole.polygon;
        const int n = static_cast<int>(poly.size());
        // outward (away from the hole) vertex directions, scaled so the offset
        // of each edge is exactly the layer distance for convex corners
        std::vector<Vec2> dir(n);
        for (int i = 0; i < n; ++i) {
            const Vec2 e0 = poly[i] - poly[(i + n - 1) % n];
            const Vec2 e1 = poly[(i + 1) % n] - poly[i];
            const Vec2 n0 = Vec2(e0.y(), -e0.x()).normalized();
            const Vec2 n1 = Vec2(e1.y(), -e1.x()).normalized();
            Vec2 v = (n0 + n1);
            if (v.norm() < 1e-12) v = n1;
            v.normalize();
            dir[i] = v / std::max(0.5, v.dot(n1));
        }
        double s = hole.spacing, dist = 0.0;
        while (s < h) {
            s = std::min(h, s * kGrowth);
            dist += s * std::sqrt(3.0) / 2.0;
            std::vector<Vec2> ring(n);
            double len = 0.0;
            for (int i = 0; i < n; ++i) ring[i] = poly[i] + dist * dir[i];
            for (int i = 0; i < n; ++i) len += (ring[(i + 1) % n] - ring[i]).norm();
            const int m = std::max(6, static_cast<int>(std::round(len / s)));
            // walk the offset polyline at equal arc length; stagger half a step per layer
            int seg = 0;
            double seg_start = 0.0;
            for (int j = 0; j < m; ++j) {
                const double target = (j + 0.5 * (static_cast<int>(dist / s) % 2)) * len / m;
                double seg_len = (ring[(seg + 1) % n] - ring[seg]).norm();
                while (seg_start + seg_len < target && seg < n - 1) {
                    seg_start += seg_len;
                    ++seg;
                    seg_len = (ring[(seg + 1) % n] - ring[seg]).norm();
                }
                const double t = seg_len > 0.0 ? std::clamp((target - seg_start) / seg_len, 0.0, 1.0) : 0.0;
                try_add(ring[seg] + t * (ring[(seg + 1) % n] - ring[seg]), s, -1);
            }
        }
        if (hole.fill && hole.disk) {
            const Circle& c = *hole.disk;
            const double s0 = hole.spacing;
            double r = c.radius * std::cos(kPi / n) - 0.8 * s0;
            for (int ringno = 0; r > 0.6 * s0; ++ringno, r -= s0 * std::sqrt(3.0) / 2.0) {
                const int m = std::max(6, static_cast<int>(std::round(2.0 * kPi * r / s0)));
                for (int j = 0; j < m; ++j) {
                    const double t = 2.0 * kPi * (j + 0.5 * (ringno % 2)) / m;
                    try_add(c.center + r * Vec2(std::cos(t), std::sin(t)), s0, k);
                }
            }
            try_add(c.center, s0, k);
        }
    }

    // one staggered layer just inside the outer boundary
    for (int i = 0; i < nb; ++i) {
        const Vec2& a = ob.points[i];
        const Vec2& b = ob.points[(i + 1) % nb];
        const Vec2 e = b - a;
        const Vec2 inward = Vec2(-e.y(), e.x()).normalized();
        try_add(0.5 * (a + b) + inward * (e.norm() * std::sqrt(3.0) / 2.0), h, -1);
    }

    // hexagonal background lattice
    Vec2 lo = g.points.front(), hi = g.points.front();
    for (const Vec2& p : ob.points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const double dy = h * std::sqrt(3.0) / 2.0;
    const int rows = static_cast<int>(std::ceil((hi.y() - lo.y()) / dy)) + 1;
    const int cols = static_cast<int>(std::ceil((hi.x() - lo.x()) / h)) + 2;
    for (int r = 0; r < rows; ++r) {
        const double y = lo.y() + r * dy;
        const double x0 = lo.x() + ((r % 2) ? 0.5 * h : 0.0);
        for (int c = 0; c < cols; ++c) try_add(Vec2(x0 + c * h, y), h, -1);
    }

    g.triangles = detail::conforming_delaunay(g.points, g.segments);

    // split over-long interior edges left at transitions between point sources
    for (int round = 0; round < 8; ++round) {
        std::vector<Vec2> extra;
        SpatialHash fresh(kProximity * h);
        for (const auto& tri : g.triangles) {
            for (int k = 0; k < 3; ++k) {
                const int a = tri[k], b = tri[(k + 1) % 3];
                if (a > b) continue;
                const double len = (g.points[b] - g.points[a]).norm();
                if (len <= 1.4 * h) continue;
                const Vec2 m = 0.5 * (g.points[a] + g.points[b]);
                if (!domain_contains(spec, m)) continue;
                if (std::any_of(holes.begin(), holes.end(),
                                [&](const HoleInput& hi) { return !hi.fill && point_in_polygon(hi.polygon, m); }))
                    continue;
                bool close = false;
                fresh.visit(m, 0.5 * h, [&](int id) {
                    close = (extra[id] - m).norm() < 0.5 * h;
                    return close;
                });
                if (close) continue;
                fresh.insert(m, static_cast<int>(extra.size()));
                extra.push_back(m);
            }
        }
        if (extra.empty()) break;
        g.points.insert(g.points.end(), extra.begin(), extra.end());
        g.triangles = detail::conforming_delaunay(g.points, g.segments);
    }

    g.triangle_hole.assign(g.triangles.size(), -1);
    for (std::size_t t = 0; t < g.triangles.size(); ++t) {
        const auto& tri = g.triangles[t];
        const Vec2 c = (g.points[tri[0]] + g.points[tri[1]] + g.points[tri[2]]) / 3.0;
        for (int k = 0; k < static_cast<int>(holes.size()); ++k)
            if (point_in_polygon(holes[k].polygon, c)) g.triangle_hole[t] = k;
    }
    return g;
}

// Builds a compacted mesh from the triangles selected by `keep`. Boundary
// edges must coincide with the constraint segments of the outer boundary and
// of every hole listed in `open_holes`.
Mesh assemble_mesh(const Generated& g, const std::vector<bool>& keep, const std::vector<bool>& open_holes,
                   std::vector<int>* node_map) {
    std::vector<int> index(g.points.size(), -1);
    Mesh m;
    for (std::size_t t = 0; t < g.triangles.size(); ++t) {
        if (!keep[t]) continue;
        std::array<int, 3> tri{};
        for (int k = 0; k < 3; ++k) {
            const int v = g.triangles[t][k];
            if (index[v] < 0) {
                index[v] = static_cast<int>(m.nodes.size());
                m.nodes.push_back(g.points[v]);
                if (node_map) node_map->push_back(v);
            }
            tri[k] = index[v];
        }
        m.triangles.push_back(tri);
    }
    for (const auto& s : g.segments) {
        if (s.owner >= 0 && !open_holes[s.owner]) continue;
        if (index[s.a] < 0 || index[s.b] < 0) throw GeometryError("mesh generation lost a boundary segment");
        m.boundary.push_back({index[s.a], index[s.b], s.tag});
    }
    return m;
}

Mesh finish(const Generated& g, const std::vector<bool>& open_holes, double h, std::vector<int>* node_map = nullptr) {
    std::vector<bool> keep(g.triangles.size());
    for (std::size_t t = 0; t < keep.size(); ++t) keep[t] = g.triangle_hole[t] < 0 || !open_holes[g.triangle_hole[t]];
    Mesh m = assemble_mesh(g, keep, open_holes, node_map);
    validate(m, 1e-14 * h * h);
    return m;
}

HoleInput disk_hole(const DomainSpec& spec, const Perturbation& hole) {
    check_clearance(spec, hole);
    const auto base = regular_polygon(hole.center, hole.eps, hole.n_segments);
    // subdivide polygon edges longer than h; extra vertices stay on the polygon
    HoleInput in;
    const int n = hole.n_segments;
    for (int i = 0; i < n; ++i) {
        const Vec2& a = base[i];
        const Vec2& b = base[(i + 1) % n];
        const int m = segments_for((b - a).norm(), spec.h);
        for (int k = 0; k < m; ++k) in.polygon.push_back(k == 0 ? a : Vec2(a + (b - a) * (static_cast<double>(k) / m)));
    }
    in.spacing = std::min(spec.h, (base[1] - base[0]).norm());
    in.disk = Circle{hole.center, hole.eps};
    return in;
}

}  // namespace

Mesh generate_mesh(const DomainSpec& spec) {
    const Generated g = generate(spec, {});
    return finish(g, {}, spec.h);
}

Mesh generate_disk_mesh(double radius, double h, ArcInterval gamma_a) {
    return generate_mesh(DomainSpec{DiskDomain{Vec2(0.0, 0.0), radius, gamma_a}, h});
}

Mesh puncture(const DomainSpec& spec, const Perturbation& hole) {
    const Generated g = generate(spec, {disk_hole(spec, hole)});
    return finish(g, {true}, spec.h);
}

Mesh puncture(const DomainSpec& spec, const Shape& object, double spacing) {
    if (!(spacing > 0.0) || spacing > spec.h) throw GeometryError("object spacing must lie in (0, h]");
    HoleInput in;
    in.polygon = shape_boundary(object, spacing);
    in.spacing = spacing;
    for (const Vec2& p : in.polygon) {
        if (!domain_contains(spec, p) || distance_to_boundary(spec, p) < spacing)
            throw GeometryError("object " + describe(object) + " is not strictly inside the domain");
    }
    const Generated g = generate(spec, {in});
    return finish(g, {true}, spec.h);
}

PuncturedPair puncture_with_fill(const DomainSpec& spec, const Perturbation& hole) {
    HoleInput in = disk_hole(spec, hole);
    in.fill = true;
    const Generated g = generate(spec, {in});
    PuncturedPair out;
    std::vector<int> punct_map, fill_map;
    out.punctured = finish(g, {true}, spec.h, &punct_map);
    out.filled = finish(g, {false}, spec.h, &fill_map);
    std::vector<int> point_to_filled(g.points.size(), -1);
    for (std::size_t i = 0; i < fill_map.size(); ++i) point_to_filled[fill_map[i]] = static_cast<int>(i);
    out.node_to_filled.resize(punct_map.size());
    for (std::size_t i = 0; i < punct_map.size(); ++i) out.node_to_filled[i] = point_to_filled[punct_map[i]];
    return out;
}

ElementRemoval remove_elements(const Mesh& mesh, std::span<const int> elements) {
    const int nt = mesh.num_triangles();
    std::vector<bool> removed(nt, false);
    const auto on_boundary = mesh.boundary_node_mask();
    for (int t : elements) {
        if (t < 0 || t >= nt) throw GeometryError("element index out of range");
        for (int v : mesh.triangles[t])
            if (on_boundary[v]) throw GeometryError("removed element " + std::to_string(t) + " touches the boundary");
        removed[t] = true;
    }

    const auto et = edge_triangles(mesh);
    // connectivity of the remaining elements through shared edges
    std::vector<int> neighbours_start(nt + 1, 0);
    std::vector<int> first_kept(nt, -1);
    int kept = 0, seed = -1;
    for (int t = 0; t < nt; ++t)
        if (!removed[t]) {
            ++kept;
            if (seed < 0) seed = t;
        }
    if (kept == 0) throw GeometryError("removal leaves an empty mesh");
    std::vector<bool> seen(nt, false);
    std::vector<int> stack{seed};
    seen[seed] = true;
    int reached = 0;
    while (!stack.empty()) {
        const int t = stack.back();
        stack.pop_back();
        ++reached;
        const auto& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k)
            for (int u : et.at(edge_key(tri[k], tri[(k + 1) % 3])))
                if (!removed[u] && !seen[u]) {
                    seen[u] = true;
                    stack.push_back(u);
                }
    }
    if (reached != kept) throw GeometryError("removal disconnects the mesh");

    ElementRemoval out;
    std::vector<int> index(mesh.nodes.size(), -1);
    for (int t = 0; t < nt; ++t) {
        if (removed[t]) continue;
        std::array<int, 3> tri{};
        for (int k = 0; k < 3; ++k) {
            const int v = mesh.triangles[t][k];
            if (index[v] < 0) {
                index[v] = static_cast<int>(out.mesh.nodes.size());
                out.mesh.nodes.push_back(mesh.nodes[v]);
                out.node_to_original.push_back(v);
            }
            tri[k] = index[v];
        }
        out.mesh.triangles.push_back(tri);
    }
    for (const auto& e : mesh.boundary) out.mesh.boundary.push_back({index[e.a], index[e.b], e.tag});
    for (int t = 0; t < nt; ++t) {
        if (removed[t]) continue;
        const auto& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
            const int a = tri[k], b = tri[(k + 1) % 3];
            const auto& ts = et.at(edge_key(a, b));
            if (ts.size() == 2 && removed[ts[0] == t ? ts[1] : ts[0]])
                out.mesh.boundary.push_back({index[a], index[b], BoundaryTag::Sigma});
        }
    }
    validate(out.mesh);
    return out;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

struct LineReader {
    std::istream& in;
    int line = 0;

    // next non-empty line with comments stripped, tokenized
    bool next(std::vector<std::string>& tokens) {
        std::string s;
        while (std::getline(in, s)) {
            ++line;
            if (const auto pos = s.find('#'); pos != std::string::npos) s.erase(pos);
            std::istringstream is(s);
            tokens.clear();
            for (std::string tok; is >> tok;) tokens.push_back(tok);
            if (!tokens.empty()) return true;
        }
        return false;
    }

    std::vector<std::string> expect(std::size_t count, const char* what) {
        std::vector<std::string> t;
        if (!next(t)) throw ParseError(line + 1, std::string("unexpected end of file, expected ") + what);
        if (t.size() != count) throw ParseError(line, std::string("expected ") + what);
        return t;
    }
};

double parse_double(const std::string& s, int line) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ParseError(line, "invalid number '" + s + "'");
    return v;
}

long long parse_int(const std::string& s, int line) {
    long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ParseError(line, "invalid integer '" + s + "'");
    return v;
}

int parse_section(LineReader& r, const char* keyword) {
    const auto t = r.expect(2, keyword);
    if (t[0] != keyword) throw ParseError(r.line, std::string("expected section '") + keyword + "'");
    const long long n = parse_int(t[1], r.line);
    if (n < 0) throw ParseError(r.line, "negative count");
    return static_cast<int>(n);
}

int parse_node(const std::string& s, int line, int nv) {
    const long long v = parse_int(s, line);
    if (v < 0 || v >= nv) throw ParseError(line, "node index " + s + " out of range [0, " + std::to_string(nv) + ")");
    return static_cast<int>(v);
}

}  // namespace

Mesh read_mesh(std::istream& in) {
    LineReader r{in};
    Mesh m;
    const int nv = parse_section(r, "nodes");
    m.nodes.reserve(nv);
    for (int i = 0; i < nv; ++i) {
        const auto t = r.expect(2, "'x y'");
        m.nodes.emplace_back(parse_double(t[0], r.line), parse_double(t[1], r.line));
    }
    const int nt = parse_section(r, "triangles");
    m.triangles.reserve(nt);
    for (int i = 0; i < nt; ++i) {
        const auto t = r.expect(3, "'i j k'");
        m.triangles.push_back({parse_node(t[0], r.line, nv), parse_node(t[1], r.line, nv), parse_node(t[2], r.line, nv)});
    }
    const int nb = parse_section(r, "boundary");
    for (int i = 0; i < nb; ++i) {
        const auto t = r.expect(3, "'i j TAG'");
        const auto tag = parse_tag(t[2]);
        if (!tag) throw ParseError(r.line, "unknown boundary tag '" + t[2] + "'");
        m.boundary.push_back({parse_node(t[0], r.line, nv), parse_node(t[1], r.line, nv), *tag});
    }
    std::vector<std::string> extra;
    if (r.next(extra)) throw ParseError(r.line, "trailing content");
    validate(m);
    return m;
}

void write_mesh(const Mesh& mesh, std::ostream& out, std::string_view header) {
    if (!header.empty()) out << "# " << header << '\n';
    char buf[64];
    out << "nodes " << mesh.nodes.size() << '\n';
    for (const Vec2& p : mesh.nodes) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x(), p.y());
        out << buf;
    }
    out << "triangles " << mesh.triangles.size() << '\n';
    for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    out << "boundary " << mesh.boundary.size() << '\n';
    for (const auto& e : mesh.boundary) out << e.a << ' ' << e.b << ' ' << tag_name(e.tag) << '\n';
}

Mesh load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open mesh file " + path.string());
    return read_mesh(in);
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path, std::string_view header) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write mesh file " + path.string());
    write_mesh(mesh, out, header);
}

}  // namespace kvtopo

#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "kvtopo/geometry.hpp"

namespace kvtopo {

enum class BoundaryTag { GammaA, GammaI, Sigma };

std::string_view tag_name(BoundaryTag tag);
std::optional<BoundaryTag> parse_tag(std::string_view name);

struct BoundaryEdge {
    int a = 0;
    int b = 0;
    BoundaryTag tag = BoundaryTag::GammaI;
    bool operator==(const BoundaryEdge&) const = default;
};

/// Unstructured P1 triangle mesh. Triangles are counter-clockwise; boundary
/// edges are oriented with the domain on their left.
struct Mesh {
    static constexpr int dim = 2;

    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> triangles;
    std::vector<BoundaryEdge> boundary;

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }

    double area(int t) const;
    Vec2 centroid(int t) const;
    double total_area() const;
    double max_edge_length() const;
    /// Per node: true when the node is an endpoint of any boundary edge.
    std::vector<bool> boundary_node_mask() const;
    bool has_tag(BoundaryTag tag) const;

    bool operator==(const Mesh& other) const;
};

/// Checks every Mesh invariant; throws GeometryError naming the first violation.
/// `min_area` is the degenerate-triangle threshold (absolute).
void validate(const Mesh& mesh, double min_area = 0.0);

// ---------------------------------------------------------------------------
// Background domains

/// Angular interval [begin, end) in radians, 0 <= begin < end <= 2*pi.
struct ArcInterval {
    double begin = 0.0;
    double end = kPi;
};

struct DiskDomain {
    Vec2 center{0.0, 0.0};
    double radius = 1.0;
    ArcInterval gamma_a{};
};

enum class Side { Bottom = 0, Right = 1, Top = 2, Left = 3 };

struct RectDomain {
    Vec2 origin{0.0, 0.0};
    double width = 1.0;
    double height = 1.0;
    /// Sides tagged GammaA, indexed by Side; the others are GammaI.
    std::array<bool, 4> gamma_a{true, true, true, false};
};

/// Background domain plus target edge length h.
struct DomainSpec {
    std::variant<DiskDomain, RectDomain> shape = RectDomain{};
    double h = 0.05;
};

/// Discretized outer boundary: closed CCW polygon, edge i joins points[i]
/// and points[(i+1) % n] and carries tags[i].
struct OuterBoundary {
    std::vector<Vec2> points;
    std::vector<BoundaryTag> tags;
};

OuterBoundary outer_boundary(const DomainSpec& spec);
/// Counter-clockwise arc length of the boundary point closest to p, measured
/// from the domain's reference point (angle 0 for disks, the origin corner
/// for rectangles).
double arc_parameter(const DomainSpec& spec, const Vec2& p);
double domain_area(const DomainSpec& spec);
bool domain_contains(const DomainSpec& spec, const Vec2& p);
/// Distance from an interior point to the exact outer boundary.
double distance_to_boundary(const DomainSpec& spec, const Vec2& p);

/// Small disk hole O = z + eps * B(0,1), realized as a regular inscribed polygon.
struct Perturbation {
    Vec2 center{0.0, 0.0};
    double eps = 0.1;
    int n_segments = 32;
};

/// Throws GeometryError unless the hole sits at distance >= 2*eps from the
/// outer boundary and n_segments >= 12.
void check_clearance(const DomainSpec& spec, const Perturbation& hole);

Mesh generate_disk_mesh(double radius, double h, ArcInterval gamma_a);
Mesh generate_mesh(const DomainSpec& spec);
Mesh puncture(const DomainSpec& spec, const Perturbation& hole);
/// Mesh of the domain minus an arbitrary object, hole boundary resolved at
/// `spacing` (<= spec.h).
Mesh puncture(const DomainSpec& spec, const Shape& object, double spacing);

/// Punctured mesh and the same triangulation with the hole filled in. Outside
/// the hole both meshes share nodes and triangles exactly, so differences of
/// functionals between them are free of remeshing noise.
struct PuncturedPair {
    Mesh punctured;
    Mesh filled;
    /// punctured node index -> filled node index
    std::vector<int> node_to_filled;
};

PuncturedPair puncture_with_fill(const DomainSpec& spec, const Perturbation& hole);

/// Mesh obtained by deleting elements, with unused nodes compacted away.
struct ElementRemoval {
    Mesh mesh;
    /// new node index -> original node index
    std::vector<int> node_to_original;
};

/// Removes `elements` and tags the exposed edges Sigma. Throws GeometryError if
/// a removed triangle touches the outer boundary or the rest is disconnected.
ElementRemoval remove_elements(const Mesh& mesh, std::span<const int> elements);

// ---------------------------------------------------------------------------
// Text format

Mesh read_mesh(std::istream& in);
void write_mesh(const Mesh& mesh, std::ostream& out, std::string_view header = {});
Mesh load_mesh(const std::filesystem::path& path);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path, std::string_view header = {});

}  // namespace kvtopo

#include "kvtopo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kvtopo/errors.hpp"

namespace kvtopo {

double polygon_signed_area(std::span<const Vec2> poly) {
    double a = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
}

bool point_in_polygon(std::span<const Vec2> poly, const Vec2& p) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
            if (p.x() < x) inside = !inside;
        }
    }
    return inside;
}

double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

double distance_to_polygon(std::span<const Vec2> poly, const Vec2& p) {
    double d = std::numeric_limits<double>::infinity();
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i)
        d = std::min(d, distance_to_segment(p, poly[i], poly[(i + 1) % n]));
    return d;
}

std::vector<Vec2> regular_polygon(const Vec2& center, double radius, int n, double phase) {
    std::vector<Vec2> pts;
    pts.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double t = phase + 2.0 * kPi * k / n;
        pts.emplace_back(center.x() + radius * std::cos(t), center.y() + radius * std::sin(t));
    }
    return pts;
}

namespace {

Vec2 ellipse_local(const Ellipse& e, const Vec2& p) {
    const Vec2 d = p - e.center;
    const double c = std::cos(e.angle), s = std::sin(e.angle);
    return {c * d.x() + s * d.y(), -s * d.x() + c * d.y()};
}

// Ramanujan's approximation; only used to pick a vertex count.
double ellipse_perimeter(double a, double b) {
    const double h = (a - b) * (a - b) / ((a + b) * (a + b));
    return kPi * (a + b) * (1.0 + 3.0 * h / (10.0 + std::sqrt(4.0 - 3.0 * h)));
}

}  // namespace

bool shape_contains(const Shape& s, const Vec2& p) {
    return std::visit(
        [&](const auto& sh) -> bool {
            using T = std::decay_t<decltype(sh)>;
            if constexpr (std::is_same_v<T, Circle>) {
                return (p - sh.center).squaredNorm() < sh.radius * sh.radius;
            } else if constexpr (std::is_same_v<T, Ellipse>) {
                const Vec2 q = ellipse_local(sh, p);
                return (q.x() * q.x()) / (sh.a * sh.a) + (q.y() * q.y()) / (sh.b * sh.b) < 1.0;
            } else {
                return point_in_polygon(sh.points, p);
            }
        },
        s);
}

double shape_area(const Shape& s) {
    return std::visit(
        [](const auto& sh) -> double {
            using T = std::decay_t<decltype(sh)>;
            if constexpr (std::is_same_v<T, Circle>) {
                return kPi * sh.radius * sh.radius;
            } else if constexpr (std::is_same_v<T, Ellipse>) {
                return kPi * sh.a * sh.b;
            } else {
                return std::abs(polygon_signed_area(sh.points));
            }
        },
        s);
}

Vec2 shape_center(const Shape& s) {
    return std::visit(
        [](const auto& sh) -> Vec2 {
            using T = std::decay_t<decltype(sh)>;
            if constexpr (std::is_same_v<T, Polygon>) {
                // area centroid
                const auto& P = sh.points;
                double a = 0.0;
                Vec2 c(0.0, 0.0);
                for (std::size_t i = 0; i < P.size(); ++i) {
                    const Vec2& p = P[i];
                    const Vec2& q = P[(i + 1) % P.size()];
                    const double w = p.x() * q.y() - q.x() * p.y();
                    a += w;
                    c += w * (p + q);
                }
                return c / (3.0 * a);
            } else {
                return sh.center;
            }
        },
        s);
}

std::vector<Vec2> shape_boundary(const Shape& s, double spacing) {
    if (!(spacing > 0.0)) throw GeometryError("shape_boundary: spacing must be positive");
    return std::visit(
        [spacing](const auto& sh) -> std::vector<Vec2> {
            using T = std::decay_t<decltype(sh)>;
            if constexpr (std::is_same_v<T, Circle>) {
                const int n = std::max(12, static_cast<int>(std::ceil(2.0 * kPi * sh.radius / spacing)));
                return regular_polygon(sh.center, sh.radius, n);
            } else if constexpr (std::is_same_v<T, Ellipse>) {
                const int n = std::max(12, static_cast<int>(std::ceil(ellipse_perimeter(sh.a, sh.b) / spacing)));
                std::vector<Vec2> pts;
                const double c = std::cos(sh.angle), si = std::sin(sh.angle);
                // parametric angle samples; refine until every chord fits
                for (int m = n;; m = m * 5 / 4 + 1) {
                    pts.clear();
                    for (int k = 0; k < m; ++k) {
                        const double t = 2.0 * kPi * k / m;
                        const double x = sh.a * std::cos(t), y = sh.b * std::sin(t);
                        pts.emplace_back(sh.center.x() + c * x - si * y, sh.center.y() + si * x + c * y);
                    }
                    double longest = 0.0;
                    for (int k = 0; k < m; ++k) longest = std::max(longest, (pts[(k + 1) % m] - pts[k]).norm());
                    if (longest <= spacing) break;
                }
                return pts;
            } else {
                std::vector<Vec2> poly = sh.points;
                if (poly.size() < 3) throw GeometryError("polygon shape needs at least 3 vertices");
                if (polygon_signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
                std::vector<Vec2> pts;
                for (std::size_t i = 0; i < poly.size(); ++i) {
                    const Vec2& a = poly[i];
                    const Vec2& b = poly[(i + 1) % poly.size()];
                    const int m = std::max(1, static_cast<int>(std::ceil((b - a).norm() / spacing)));
                    for (int k = 0; k < m; ++k) pts.push_back(a + (b - a) * (static_cast<double>(k) / m));
                }
                return pts;
            }
        },
        s);
}

std::string describe(const Shape& s) {
    std::ostringstream os;
    os.precision(17);
    std::visit(
        [&](const auto& sh) {
            using T = std::decay_t<decltype(sh)>;
            if constexpr (std::is_same_v<T, Circle>) {
                os << "circle(" << sh.center.x() << "," << sh.center.y() << ";r=" << sh.radius << ")";
            } else if constexpr (std::is_same_v<T, Ellipse>) {
                os << "ellipse(" << sh.center.x() << "," << sh.center.y() << ";a=" << sh.a << ";b=" << sh.b
                   << ";angle=" << sh.angle << ")";
            } else {
                os << "polygon(";
                for (std::size_t i = 0; i < sh.points.size(); ++i)
                    os << (i ? ";" : "") << sh.points[i].x() << "," << sh.points[i].y();
                os << ")";
            }
        },
        s);
    return os.str();
}

}  // namespace kvtopo

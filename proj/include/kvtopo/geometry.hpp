#pragma once

#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace kvtopo {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = std::numbers::pi;

/// Twice the signed area of (a, b, c); positive when counter-clockwise.
inline double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

double polygon_signed_area(std::span<const Vec2> poly);
bool point_in_polygon(std::span<const Vec2> poly, const Vec2& p);
double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b);
/// Distance from p to the closed polyline through poly (last vertex joins the first).
double distance_to_polygon(std::span<const Vec2> poly, const Vec2& p);
/// Regular n-gon inscribed in the circle (center, radius), counter-clockwise,
/// first vertex at angle `phase`.
std::vector<Vec2> regular_polygon(const Vec2& center, double radius, int n, double phase = 0.0);

struct Circle {
    Vec2 center{0.0, 0.0};
    double radius = 1.0;
};

struct Ellipse {
    Vec2 center{0.0, 0.0};
    double a = 1.0;      // semi-axis along the rotated x direction
    double b = 1.0;      // semi-axis along the rotated y direction
    double angle = 0.0;  // radians, counter-clockwise
};

struct Polygon {
    std::vector<Vec2> points;  // counter-clockwise, not closed
};

/// Ground-truth object descriptor.
using Shape = std::variant<Circle, Ellipse, Polygon>;

bool shape_contains(const Shape& s, const Vec2& p);
double shape_area(const Shape& s);
Vec2 shape_center(const Shape& s);
/// Counter-clockwise boundary polygon with edges no longer than `spacing`
/// (at least 12 vertices for curved shapes). Vertices lie on the exact curve.
std::vector<Vec2> shape_boundary(const Shape& s, double spacing);
std::string describe(const Shape& s);

}  // namespace kvtopo

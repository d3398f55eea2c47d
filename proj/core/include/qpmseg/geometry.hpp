#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qpmseg {

/// Integer pixel coordinate, x to the right, y down.
struct PixelCoord {
    int x = 0;
    int y = 0;

    friend bool operator==(PixelCoord a, PixelCoord b) { return a.x == b.x && a.y == b.y; }
    /// Row-major order: by y, then x.
    friend bool operator<(PixelCoord a, PixelCoord b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    }
};

/// Continuous 2-D point (pixel units or micrometers depending on context).
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
};

double distance(Vec2 a, Vec2 b);

/// Inclusive integer bounding box.
struct PixelBox {
    int x_min = 0;
    int y_min = 0;
    int x_max = -1;
    int y_max = -1;

    int width() const { return x_max - x_min + 1; }
    int height() const { return y_max - y_min + 1; }
    bool contains(PixelCoord p) const {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }
    /// True when `inner` lies entirely within *this.
    bool contains(const PixelBox& inner) const {
        return inner.x_min >= x_min && inner.x_max <= x_max &&
               inner.y_min >= y_min && inner.y_max <= y_max;
    }
    friend bool operator==(const PixelBox& a, const PixelBox& b) {
        return a.x_min == b.x_min && a.y_min == b.y_min && a.x_max == b.x_max && a.y_max == b.y_max;
    }
};

struct Circle {
    Vec2 center;
    double radius = 0.0;

    bool contains(Vec2 p, double slack = 1e-9) const;
};

/// Smallest circle covering all points (Welzl, expected linear time).
/// Deterministic: the internal shuffle uses a fixed seed.
Circle minimal_enclosing_circle(std::span<const Vec2> points);

/// Convex hull in counter-clockwise order (monotone chain). Collinear points
/// are dropped. Returns fewer than 3 vertices for degenerate inputs.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

/// Signed shoelace area, positive for counter-clockwise rings.
double polygon_area(std::span<const Vec2> ring);

} // namespace qpmseg

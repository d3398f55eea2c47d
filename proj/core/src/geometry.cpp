#include "qpmseg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace qpmseg {

double distance(Vec2 a, Vec2 b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

bool Circle::contains(Vec2 p, double slack) const {
    const double dx = p.x - center.x;
    const double dy = p.y - center.y;
    const double r = radius + slack;
    return dx * dx + dy * dy <= r * r;
}

namespace {

Circle circle_from_two(Vec2 a, Vec2 b) {
    const Vec2 c{(a.x + b.x) * 0.5, (a.y + b.y) * 0.5};
    return {c, distance(a, b) * 0.5};
}

// Circumcircle of three points; falls back to the widest two-point circle
// when the points are (nearly) collinear.
Circle circle_from_three(Vec2 a, Vec2 b, Vec2 c) {
    const double bx = b.x - a.x, by = b.y - a.y;
    const double cx = c.x - a.x, cy = c.y - a.y;
    const double d = 2.0 * (bx * cy - by * cx);
    if (std::abs(d) < 1e-12) {
        Circle best = circle_from_two(a, b);
        for (const Circle& cand : {circle_from_two(a, c), circle_from_two(b, c)}) {
            if (cand.radius > best.radius) best = cand;
        }
        return best;
    }
    const double b2 = bx * bx + by * by;
    const double c2 = cx * cx + cy * cy;
    const Vec2 center{a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d};
    return {center, distance(center, a)};
}

// Incremental minidisk (Welzl). Expected linear time on shuffled input;
// the inner loops re-solve prefixes with one or two points pinned on the
// boundary of the candidate circle.
Circle welzl(std::span<const Vec2> pts) {
    Circle c{pts[0], 0.0};
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (c.contains(pts[i])) continue;
        c = {pts[i], 0.0};
        for (std::size_t j = 0; j < i; ++j) {
            if (c.contains(pts[j])) continue;
            c = circle_from_two(pts[i], pts[j]);
            for (std::size_t k = 0; k < j; ++k) {
                if (!c.contains(pts[k])) c = circle_from_three(pts[i], pts[j], pts[k]);
            }
        }
    }
    return c;
}

} // namespace

Circle minimal_enclosing_circle(std::span<const Vec2> points) {
    if (points.empty()) return {{0.0, 0.0}, 0.0};
    std::vector<Vec2> pts(points.begin(), points.end());
    // Fixed seed keeps results identical across runs and worker counts.
    std::mt19937 rng(0x9e3779b9u);
    std::shuffle(pts.begin(), pts.end(), rng);
    return welzl(pts);
}

std::vector<Vec2> convex_hull(std::vector<Vec2> points) {
    std::sort(points.begin(), points.end(), [](Vec2 a, Vec2 b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    points.erase(std::unique(points.begin(), points.end(), [](Vec2 a, Vec2 b) {
                     return a.x == b.x && a.y == b.y;
                 }),
                 points.end());
    const std::size_t n = points.size();
    if (n < 3) return points;

    auto cross = [](Vec2 o, Vec2 a, Vec2 b) {
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    };
    std::vector<Vec2> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) { // lower hull
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
        hull[k++] = points[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) { // upper hull
        while (k >= t && cross(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
        hull[k++] = points[i];
    }
    hull.resize(k - 1);
    return hull;
}

double polygon_area(std::span<const Vec2> ring) {
    const std::size_t n = ring.size();
    if (n < 3) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    return 0.5 * acc;
}

} // namespace qpmseg

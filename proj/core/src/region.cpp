#include "qpmseg/region.hpp"

#include "qpmseg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qpmseg {

namespace {

// Clockwise in image coordinates (y down), starting east.
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

// Bit mask of member pixels over the bounding box, for O(1) membership.
class BoxMask {
public:
    BoxMask(const PixelBox& box, std::span<const PixelCoord> pixels)
        : box_(box), grid_(static_cast<std::size_t>(box.width()) * box.height(), 0) {
        for (const PixelCoord& p : pixels) grid_[index(p)] = 1;
    }
    bool test(PixelCoord p) const { return box_.contains(p) && grid_[index(p)] != 0; }

private:
    std::size_t index(PixelCoord p) const {
        return static_cast<std::size_t>(p.y - box_.y_min) * box_.width() + (p.x - box_.x_min);
    }
    PixelBox box_;
    std::vector<std::uint8_t> grid_;
};

bool is_connected(std::span<const PixelCoord> sorted_pixels, const PixelBox& box,
                  const BoxMask& mask) {
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(box.width()) * box.height(), 0);
    auto idx = [&](PixelCoord p) {
        return static_cast<std::size_t>(p.y - box.y_min) * box.width() + (p.x - box.x_min);
    };
    std::vector<PixelCoord> stack{sorted_pixels[0]};
    seen[idx(sorted_pixels[0])] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const PixelCoord p = stack.back();
        stack.pop_back();
        for (int d = 0; d < 8; ++d) {
            const PixelCoord q{p.x + kDx[d], p.y + kDy[d]};
            if (!mask.test(q) || seen[idx(q)]) continue;
            seen[idx(q)] = 1;
            ++reached;
            stack.push_back(q);
        }
    }
    return reached == sorted_pixels.size();
}

// Moore-neighbor border following with Jacob's stopping criterion. Starts at
// the topmost-leftmost pixel and walks the outer boundary clockwise. Spur
// pixels appear twice in the cycle, which is what a polygonal out-and-back
// boundary requires.
std::vector<PixelCoord> trace_boundary(PixelCoord start, const BoxMask& mask) {
    std::vector<PixelCoord> cycle;
    // Entry direction: the neighbor we came "from". The start pixel has no
    // member to its west or north, so scanning clockwise from west is safe.
    int from = 4; // west
    PixelCoord current = start;
    int first_exit = -1;
    const std::size_t hard_cap = 1u << 24;
    while (true) {
        int exit_dir = -1;
        for (int step = 1; step <= 8; ++step) {
            const int d = (from + step) % 8;
            const PixelCoord q{current.x + kDx[d], current.y + kDy[d]};
            if (mask.test(q)) {
                exit_dir = d;
                break;
            }
        }
        if (exit_dir < 0) return {start}; // isolated pixel
        if (cycle.empty()) {
            first_exit = exit_dir;
        } else if (current == start && exit_dir == first_exit) {
            return cycle; // closed: re-entered the start the same way
        }
        cycle.push_back(current);
        current = {current.x + kDx[exit_dir], current.y + kDy[exit_dir]};
        from = (exit_dir + 4) % 8;
        if (cycle.size() > hard_cap) throw Error("boundary trace did not terminate");
    }
}

// Length of the midpoint-smoothed closed polygon through the boundary cycle.
// Smoothing cancels the staircase inflation of raw chain codes, which keeps
// the isoperimetric circularity of rasterized disks near 1. Cycles of fewer
// than three vertices fall back to the raw cycle length.
double smoothed_cycle_length(std::span<const PixelCoord> cycle) {
    const std::size_t n = cycle.size();
    if (n < 2) return 0.0;
    auto vec = [&](std::size_t i) {
        return Vec2{static_cast<double>(cycle[i].x), static_cast<double>(cycle[i].y)};
    };
    if (n == 2) return 2.0 * distance(vec(0), vec(1));
    double total = 0.0;
    Vec2 prev_mid = (vec(n - 1) + vec(0)) * 0.5;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 mid = (vec(i) + vec((i + 1) % n)) * 0.5;
        total += distance(prev_mid, mid);
        prev_mid = mid;
    }
    return total;
}

} // namespace

bool Region::contains(PixelCoord p) const {
    return std::binary_search(pixels.begin(), pixels.end(), p);
}

Region region_from_pixels(std::vector<PixelCoord> pixels, double pixel_size_um) {
    if (pixels.empty()) throw Error("region_from_pixels: empty pixel set");
    if (!(pixel_size_um > 0.0)) throw Error("region_from_pixels: pixel size must be positive");

    std::sort(pixels.begin(), pixels.end());
    if (std::adjacent_find(pixels.begin(), pixels.end()) != pixels.end()) {
        throw Error("region_from_pixels: duplicate pixel coordinates");
    }

    Region r;
    r.pixels = std::move(pixels);
    r.area_px = static_cast<int>(r.pixels.size());
    r.pixel_size_um = pixel_size_um;
    r.area_um2 = static_cast<double>(r.area_px) * pixel_size_um * pixel_size_um;

    PixelBox box{r.pixels[0].x, r.pixels[0].y, r.pixels[0].x, r.pixels[0].y};
    double sx = 0.0, sy = 0.0;
    for (const PixelCoord& p : r.pixels) {
        box.x_min = std::min(box.x_min, p.x);
        box.x_max = std::max(box.x_max, p.x);
        box.y_min = std::min(box.y_min, p.y);
        box.y_max = std::max(box.y_max, p.y);
        sx += p.x;
        sy += p.y;
    }
    r.bbox = box;
    r.centroid_um = {sx / r.area_px * pixel_size_um, sy / r.area_px * pixel_size_um};

    const BoxMask mask(box, r.pixels);
    if (!is_connected(r.pixels, box, mask)) {
        throw Error("region_from_pixels: pixel set is not 8-connected (" +
                    std::to_string(r.area_px) + " pixels)");
    }

    r.boundary = trace_boundary(r.pixels[0], mask);
    r.perimeter_um = smoothed_cycle_length(r.boundary) * pixel_size_um;

    std::vector<Vec2> centers;
    centers.reserve(r.pixels.size());
    for (const PixelCoord& p : r.pixels) {
        centers.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
    }
    // Welzl on the hull only; the hull carries every support point.
    std::vector<Vec2> hull = convex_hull(std::move(centers));
    const Circle c_px = minimal_enclosing_circle(hull);
    r.enclosing_circle_um = {{c_px.center.x * pixel_size_um, c_px.center.y * pixel_size_um},
                             c_px.radius * pixel_size_um};
    return r;
}

double convex_hull_area_um2(const Region& region) {
    std::vector<Vec2> corners;
    corners.reserve(region.boundary.size() * 4);
    auto push_corners = [&corners](PixelCoord p) {
        corners.push_back({p.x - 0.5, p.y - 0.5});
        corners.push_back({p.x + 0.5, p.y - 0.5});
        corners.push_back({p.x - 0.5, p.y + 0.5});
        corners.push_back({p.x + 0.5, p.y + 0.5});
    };
    if (region.boundary.empty()) {
        for (const PixelCoord& p : region.pixels) push_corners(p);
    } else {
        for (const PixelCoord& p : region.boundary) push_corners(p);
    }
    const std::vector<Vec2> hull = convex_hull(std::move(corners));
    const double area_px2 = std::abs(polygon_area(hull));
    return area_px2 * region.pixel_size_um * region.pixel_size_um;
}

} // namespace qpmseg

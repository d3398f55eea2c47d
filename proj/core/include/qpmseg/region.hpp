#pragma once

#include "qpmseg/geometry.hpp"

#include <span>
#include <vector>

namespace qpmseg {

/// One 8-connected pixel component with its traced outer boundary and the
/// geometry derived from it. All micrometer quantities are computed from
/// pixel-unit geometry scaled by the pixel size, so rescaling the calibration
/// rescales lengths, areas and volumes exactly. Immutable value type.
struct Region {
    /// Member pixels, sorted row-major (y, then x).
    std::vector<PixelCoord> pixels;
    /// Outer boundary, one closed clockwise cycle of member pixels.
    std::vector<PixelCoord> boundary;

    int area_px = 0;
    double pixel_size_um = 1.0;
    double area_um2 = 0.0;
    PixelBox bbox;
    /// Mass center of the pixel set, in micrometers.
    Vec2 centroid_um;
    /// Minimal circle enclosing all pixel centers, in micrometers.
    Circle enclosing_circle_um;
    /// Length of the corner-smoothed boundary polygon, in micrometers.
    /// Zero for single-pixel regions.
    double perimeter_um = 0.0;

    bool contains(PixelCoord p) const;
    double enclosing_diameter_um() const { return 2.0 * enclosing_circle_um.radius; }
};

/// Builds a Region from an 8-connected pixel set.
/// Throws Error if the set is empty, contains duplicates, or is disconnected.
Region region_from_pixels(std::vector<PixelCoord> pixels, double pixel_size_um);

/// Convex hull area of the region treated as a union of unit pixel squares
/// (hull over pixel corners), in square micrometers.
double convex_hull_area_um2(const Region& region);

} // namespace qpmseg

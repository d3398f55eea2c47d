#pragma once

#include "qpmseg/image.hpp"
#include "qpmseg/internal.hpp"
#include "qpmseg/region.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace qpmseg {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(Rgb a, Rgb b) { return a.r == b.r && a.g == b.g && a.b == b.b; }
};

/// Simple RGB raster written as binary PPM (P6).
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<Rgb> pixels;

    Rgb& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    Rgb at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// One detected cell to draw: contour, enclosing circle, bounding box, and
/// the nucleus contour when present.
struct OverlayCell {
    const Region* cell = nullptr;
    const Region* nucleus = nullptr; // optional
};

inline constexpr Rgb kContourColor{0, 220, 0};
inline constexpr Rgb kCircleColor{250, 210, 0};
inline constexpr Rgb kBboxColor{70, 130, 255};
inline constexpr Rgb kNucleusColor{255, 40, 40};

/// Grayscale rendering of the phase image (normalized to its own range)
/// with contour, enclosing circle, bounding box and nucleus overdrawn.
RgbImage render_overlay(const PhaseImage& img, const std::vector<OverlayCell>& cells);

void save_ppm(const RgbImage& img, const std::filesystem::path& path);
RgbImage load_ppm(const std::filesystem::path& path);

} // namespace qpmseg

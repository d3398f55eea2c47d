#include "qpmseg/overlay.hpp"

#include "qpmseg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace qpmseg {

namespace {

void draw_pixel(RgbImage& img, int x, int y, Rgb color) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    img.at(x, y) = color;
}

void draw_box(RgbImage& img, const PixelBox& box, Rgb color) {
    for (int x = box.x_min; x <= box.x_max; ++x) {
        draw_pixel(img, x, box.y_min, color);
        draw_pixel(img, x, box.y_max, color);
    }
    for (int y = box.y_min; y <= box.y_max; ++y) {
        draw_pixel(img, box.x_min, y, color);
        draw_pixel(img, box.x_max, y, color);
    }
}

// Midpoint circle over a continuous center/radius in pixel units.
void draw_circle(RgbImage& img, double cx, double cy, double radius, Rgb color) {
    const int steps = std::max(16, static_cast<int>(std::ceil(2.0 * 3.14159265358979 * radius)));
    for (int i = 0; i < steps; ++i) {
        const double a = 2.0 * 3.14159265358979 * i / steps;
        draw_pixel(img, static_cast<int>(std::lround(cx + radius * std::cos(a))),
                   static_cast<int>(std::lround(cy + radius * std::sin(a))), color);
    }
}

} // namespace

RgbImage render_overlay(const PhaseImage& img, const std::vector<OverlayCell>& cells) {
    RgbImage out;
    out.width = img.width();
    out.height = img.height();
    out.pixels.resize(img.pixel_count());

    float lo = std::numeric_limits<float>::infinity();
    float hi = -std::numeric_limits<float>::infinity();
    for (float v : img.samples()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const float range = hi > lo ? hi - lo : 1.0f;
    for (std::size_t i = 0; i < img.samples().size(); ++i) {
        const auto g =
            static_cast<std::uint8_t>(std::lround(255.0f * (img.samples()[i] - lo) / range));
        out.pixels[i] = {g, g, g};
    }

    for (const OverlayCell& oc : cells) {
        if (oc.cell == nullptr) continue;
        const Region& cell = *oc.cell;
        const double s = cell.pixel_size_um;
        draw_box(out, cell.bbox, kBboxColor);
        draw_circle(out, cell.enclosing_circle_um.center.x / s,
                    cell.enclosing_circle_um.center.y / s, cell.enclosing_circle_um.radius / s,
                    kCircleColor);
        for (const PixelCoord& p : cell.boundary) draw_pixel(out, p.x, p.y, kContourColor);
        if (oc.nucleus != nullptr) {
            for (const PixelCoord& p : oc.nucleus->boundary) {
                draw_pixel(out, p.x, p.y, kNucleusColor);
            }
        }
    }
    return out;
}

void save_ppm(const RgbImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size() * 3));
    if (!out) throw Error("write failed: " + path.string());
}

RgbImage load_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (magic != "P6" || w < 1 || h < 1 || maxval != 255) {
        throw Error(path.string() + ": unsupported PPM");
    }
    in.get(); // single whitespace after the header
    RgbImage img;
    img.width = w;
    img.height = h;
    img.pixels.resize(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size() * 3));
    if (!in) throw Error(path.string() + ": truncated PPM");
    return img;
}

} // namespace qpmseg

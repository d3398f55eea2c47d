#include "qpmseg/image.hpp"

#include <cmath>
#include <utility>

namespace qpmseg {

PhaseImage::PhaseImage(std::string id, int width, int height, std::vector<float> phase,
                       double pixel_size_um, double wavelength_nm)
    : id_(std::move(id)),
      width_(width),
      height_(height),
      phase_(std::move(phase)),
      pixel_size_um_(pixel_size_um),
      wavelength_nm_(wavelength_nm) {
    if (width_ < 1 || height_ < 1) {
        throw LoadError("image '" + id_ + "': dimensions must be at least 1x1");
    }
    if (phase_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
        throw LoadError("image '" + id_ + "': sample count does not match width*height");
    }
    if (!(pixel_size_um_ > 0.0) || !(wavelength_nm_ > 0.0)) {
        throw LoadError("image '" + id_ + "': pixel size and wavelength must be positive");
    }
    for (float v : phase_) {
        if (!std::isfinite(v)) {
            throw LoadError("image '" + id_ + "': non-finite phase sample");
        }
    }
}

double phase_to_density_um(double phase_rad, double wavelength_nm) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    const double wavelength_um = wavelength_nm * 1e-3;
    return wavelength_um * phase_rad / two_pi;
}

} // namespace qpmseg

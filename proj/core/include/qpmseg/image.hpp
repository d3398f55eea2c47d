#pragma once

#include "qpmseg/errors.hpp"

#include <string>
#include <vector>

namespace qpmseg {

/// Quantitative phase image: a row-major grid of phase samples in radians
/// plus the physical calibration needed to express results in micrometers.
/// Immutable after construction; safe to share across workers.
class PhaseImage {
public:
    /// Validates dimensions, calibration and sample finiteness; throws LoadError.
    PhaseImage(std::string id, int width, int height, std::vector<float> phase,
               double pixel_size_um, double wavelength_nm);

    const std::string& id() const { return id_; }
    int width() const { return width_; }
    int height() const { return height_; }
    double pixel_size_um() const { return pixel_size_um_; }
    double wavelength_nm() const { return wavelength_nm_; }

    float at(int x, int y) const { return phase_[static_cast<std::size_t>(y) * width_ + x]; }
    const std::vector<float>& samples() const { return phase_; }
    std::size_t pixel_count() const { return phase_.size(); }

private:
    std::string id_;
    int width_;
    int height_;
    std::vector<float> phase_;
    double pixel_size_um_;
    double wavelength_nm_;
};

/// Optical density in micrometers for a phase sample: rho_o = lambda * phi / (2*pi),
/// with lambda converted from nanometers. Linear in phi; negative phase maps to
/// negative density.
double phase_to_density_um(double phase_rad, double wavelength_nm);

} // namespace qpmseg

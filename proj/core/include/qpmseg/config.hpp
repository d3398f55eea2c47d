#pragma once

#include <filesystem>
#include <string>

namespace qpmseg {

/// Tunable constants of the segmentation pipeline. Defaults follow the
/// reference operating point; every field can be overridden by a JSON config
/// file, QPMSEG_* environment variables, or CLI flags (in that order of
/// increasing precedence).
struct Config {
    /// Smallest plausible cell radius; candidates below pi*r_min^2 are rejected.
    double r_min_um = 3.0;
    /// Cells below this enclosing-circle diameter skip internal detection.
    double d_internal_min_um = 25.0;
    /// Internal-structure components smaller than this are dropped.
    int min_structure_px = 20;
    /// Histogram bin width used for the background-mode estimate.
    double histogram_bin_width_rad = 0.01;
    /// Gradient threshold is gradient_factor * mean gradient magnitude.
    double gradient_factor = 4.0;
    /// Fraction of (dilated) boundary pixels that must clear the gradient threshold.
    double gradient_boundary_fraction = 0.25;
    /// Robust outlier cut for per-image backgrounds, in MAD-scaled units.
    double background_sigma_factor = 3.0;
    /// Foreground connectivity. Fixed; diagonal bridges keep cells whole.
    static constexpr int connectivity = 8;

    /// Throws ConfigError if any field is out of range.
    void validate() const;
};

/// Parse a JSON config file. Unknown keys are rejected so typos surface early.
Config load_config_file(const std::filesystem::path& path, Config base = {});

/// Apply QPMSEG_<FIELD> environment variable overrides (e.g. QPMSEG_R_MIN_UM).
Config apply_env_overrides(Config base);

} // namespace qpmseg

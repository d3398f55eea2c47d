#pragma once

#include "qpmseg/image.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace qpmseg {

/// Calibration overrides; when set they take precedence over sidecar values.
struct Calibration {
    std::optional<double> pixel_size_um;
    std::optional<double> wavelength_nm;
};

/// Loads a phase image from either
///  - `.raw`: little-endian float32/float64 grid with a JSON sidecar
///    `<file>.json` describing width, height, dtype, pixel_size_um,
///    wavelength_nm and endianness, or
///  - `.tif`/`.tiff`: single-channel uncompressed 32-bit IEEE float TIFF
///    (calibration must come from `cal`, TIFF carries none).
/// The image id is the file stem. Throws LoadError.
PhaseImage load_image(const std::filesystem::path& path, const Calibration& cal = {});

/// Writes `<path>` (float32 binary) and `<path>.json` (sidecar header).
void save_raw(const PhaseImage& img, const std::filesystem::path& path);

/// Writes a minimal single-strip float32 grayscale TIFF.
void save_tiff(const PhaseImage& img, const std::filesystem::path& path);

/// Supported image files in a directory, sorted by filename for a
/// deterministic measurement order.
std::vector<std::filesystem::path> list_image_files(const std::filesystem::path& dir);

} // namespace qpmseg

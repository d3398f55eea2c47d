#pragma once

#include "qpmseg/geometry.hpp"
#include "qpmseg/image.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace qpmseg {

/// Parameters of the synthetic scene generator. Cells are rendered as
/// radially decreasing phase domes (truncated paraboloid on a pedestal) with
/// one nucleus bump each and optional dimmer side blobs; debris patches are
/// speckle under a diffuse envelope. Everything is deterministic in the seed.
struct PhantomParams {
    int width = 512;
    int height = 384;
    double pixel_size_um = 0.5;
    double wavelength_nm = 528.0;

    double background_phase = 0.1; ///< radians; the histogram mode
    double noise_sigma = 0.02;     ///< additive Gaussian noise, radians

    int cells_min = 3;
    int cells_max = 7;
    double diameter_min_um = 6.0;
    double diameter_max_um = 60.0;
    /// Cytoplasm dome peaks. Kept below 4 * threshold so the dome itself never
    /// enters internal detection; only nucleus and blob bumps do.
    double peak_phase_min = 0.5;
    double peak_phase_max = 0.7;
    /// Phase at the cell rim; keeps the thresholded mask close to the true
    /// support. Zero gives a pure paraboloid profile.
    double pedestal_phase = 0.3;

    double nucleus_contrast = 2.5; ///< nucleus amplitude = contrast * cell peak
    double nucleus_radius_fraction_min = 0.25;
    double nucleus_radius_fraction_max = 0.35;
    double nucleus_offset_fraction_max = 0.25; ///< of (R - r_n)

    int blobs_per_cell_max = 2;
    /// Absolute phase level a side blob peaks at: between the second and
    /// third internal thresholds, so blobs appear as their own structures
    /// without ever competing against the nucleus at tier 3.
    double blob_peak_phase = 1.33;

    int debris_count = 3;
    /// Adds a deep negative patch so the image trips the phase-wrap filter.
    bool add_wrap_patch = false;
};

struct PhantomBlob {
    Vec2 center_px;
    double radius_px = 0.0;
    double amplitude = 0.0;
    std::vector<PixelCoord> mask; ///< sorted row-major
};

struct PhantomCell {
    Vec2 center_px;
    double radius_px = 0.0;
    double peak_phase = 0.0;
    std::vector<PixelCoord> mask; ///< support of the dome, sorted
    PhantomBlob nucleus;
    std::vector<PhantomBlob> blobs;
};

struct PhantomDebris {
    Vec2 center_px;
    double radius_px = 0.0;
    std::string kind; ///< "diffuse" or "small"
    std::vector<PixelCoord> mask;
};

struct PhantomScene {
    PhaseImage image;
    std::vector<PhantomCell> cells;
    std::vector<PhantomDebris> debris;
    std::uint64_t seed = 0;
    PhantomParams params;
};

/// Builds one scene. Throws Error when the requested cells cannot be placed
/// disjointly (overcrowding).
PhantomScene generate_phantom(const PhantomParams& params, std::uint64_t seed,
                              const std::string& image_id = "");

/// Ground truth as needed by the evaluation harness (no pixel data).
struct SceneGroundTruth {
    std::string image_id;
    struct Cell {
        std::vector<PixelCoord> mask;
        std::vector<PixelCoord> nucleus_mask;
        std::vector<std::vector<PixelCoord>> blob_masks;
    };
    std::vector<Cell> cells;
    std::size_t debris_count = 0;
};

SceneGroundTruth ground_truth(const PhantomScene& scene);

/// Writes `<id>.raw` + `<id>.raw.json` (the image) and `<id>.gt.json`
/// (ground-truth masks, run-length encoded).
void save_scene(const PhantomScene& scene, const std::filesystem::path& dir);

/// Reads a `<id>.gt.json` file written by save_scene.
SceneGroundTruth load_ground_truth(const std::filesystem::path& gt_json_path);

} // namespace qpmseg

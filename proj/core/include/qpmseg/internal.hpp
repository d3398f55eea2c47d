#pragma once

#include "qpmseg/config.hpp"
#include "qpmseg/image.hpp"
#include "qpmseg/region.hpp"

#include <optional>
#include <vector>

namespace qpmseg {

/// The three thresholds driving internal-structure detection. The first two
/// scale the cell threshold; the third tracks the measurement-wide mean of
/// per-cell phase maxima and is normally the strictest.
struct InternalThresholds {
    double t1 = 0.0;            ///< 4 * t
    double t2 = 0.0;            ///< 6 * t
    double t3 = 0.0;            ///< 0.8 * mean(per-cell max phase)
    double mean_cell_max = 0.0; ///< the averaged per-cell maxima
};

/// One internal structure of a cell. Structures are identified by their
/// component at the strictest threshold that sees them; the region is the
/// component at the mildest threshold where the structure is still a
/// separate contour (its full extent). The tier set records every threshold
/// whose component contains the structure's core.
struct InternalStructure {
    Region region;
    /// Subset of {1,2,3}; ascending.
    std::vector<int> tiers;
    double mean_density_um = 0.0;
    double max_density_um = 0.0;

    bool has_tier(int tier) const;
};

/// Nucleus choice for one cell plus the candidate set the choice was made from.
struct NucleusResult {
    std::optional<std::size_t> nucleus_index; ///< into `candidates`
    std::vector<InternalStructure> candidates;
    bool abnormal_or_aggregate = false;

    bool has_nucleus() const { return nucleus_index.has_value(); }
    const InternalStructure& nucleus() const { return candidates[*nucleus_index]; }
};

/// Per-cell phase samples cropped to the cell's bounding box.
/// Samples outside the cell mask are present but ignored by detection.
struct CellPatch {
    PixelBox bbox;
    int width = 0;
    std::vector<float> phase; ///< row-major over bbox

    float at(int x, int y) const { // absolute image coordinates
        return phase[static_cast<std::size_t>(y - bbox.y_min) * width + (x - bbox.x_min)];
    }
};

CellPatch crop_patch(const PhaseImage& img, const PixelBox& bbox);

/// t1 = 4t, t2 = 6t, t3 = 0.8 * mean of per-cell maxima. The mean runs over
/// the supplied maxima, one entry per detected (non-border) cell of the whole
/// measurement. Throws EmptyMeasurementError when no cell is available.
InternalThresholds compute_internal_thresholds(double cell_threshold,
                                               const std::vector<double>& cell_max_phases);

/// Internal detection only runs on cells at least this large.
bool eligible_for_internal(const Region& cell, const Config& cfg);

/// Threshold the cell interior at t1/t2/t3, drop components below
/// cfg.min_structure_px, and merge components across tiers by containment.
/// Structures are ordered by their topmost-leftmost pixel.
std::vector<InternalStructure> detect_internal(const Region& cell, const CellPatch& patch,
                                               double wavelength_nm,
                                               const InternalThresholds& th, const Config& cfg);

/// Nucleus selection: a lone structure wins outright; otherwise structures
/// seen at tier 3 are the candidates, and if several remain the cell is
/// flagged abnormal-or-aggregate and the highest mean optical density wins
/// (ties: larger area, then topmost-leftmost). Without any tier-3 structure
/// all structures compete by mean density, unflagged.
NucleusResult select_nucleus(std::vector<InternalStructure> structures);

} // namespace qpmseg

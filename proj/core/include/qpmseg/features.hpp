#pragma once

#include "qpmseg/image.hpp"
#include "qpmseg/internal.hpp"
#include "qpmseg/region.hpp"

#include <optional>
#include <string>

namespace qpmseg {

/// The four shape scores, each min(A_cell, A_shape) / max(A_cell, A_shape)
/// against a different comparison shape, so all lie in [0, 1].
struct ShapeScores {
    double circularity = 0.0;  ///< vs the isoperimetric circle (perimeter^2 / 4pi)
    double roundness = 0.0;    ///< vs the minimal enclosing circle
    double polygonality = 0.0; ///< vs the convex hull
    double ellipticity = 0.0;  ///< vs the ellipse spanning the bounding box
};

/// Integral of optical density over a pixel mask.
struct VolumeResult {
    double volume_um3 = 0.0;
    /// Share of |volume| contributed by negative-phase pixels; diagnostic.
    double negative_fraction = 0.0;
};

/// Nucleus-derived features. Only present when a nucleus was selected.
struct NucleusFeatures {
    double diameter_um = 0.0;
    double area_um2 = 0.0;
    std::optional<double> circularity;
    std::optional<double> roundness;
    double offset_um = 0.0;       ///< centroid distance nucleus vs cell
    double area_ratio = 0.0;      ///< nucleus area / cell area
    double volume_ratio = 0.0;    ///< nucleus volume / cell volume
    double volume_um3 = 0.0;
    int structures_inside = 0;    ///< other structures fully inside the nucleus
    double max_density_um = 0.0;
    double mean_density_um = 0.0;
    int candidate_count = 0;      ///< possible nuclei seen for this cell
};

/// Everything exported per accepted cell.
struct FeatureRecord {
    std::string image_id;
    std::string cell_id;

    Vec2 centroid_um;
    PixelBox bbox;
    int area_px = 0;
    double area_um2 = 0.0;
    double diameter_um = 0.0; ///< enclosing-circle diameter
    double perimeter_um = 0.0;

    /// Unset for degenerate (zero-perimeter) regions.
    std::optional<ShapeScores> scores;

    double volume_um3 = 0.0;
    double negative_volume_fraction = 0.0;
    int structure_count = 0;

    std::optional<NucleusFeatures> nucleus;

    bool border = false;
    bool abnormal_or_aggregate = false;
    bool internal_skipped = false;
};

/// Shape scores of a region; nullopt when the perimeter is zero.
std::optional<ShapeScores> shape_scores(const Region& region);

/// Optical-density integral over the region: sum of rho_o(x, y) * s_px^2.
/// Negative-phase pixels contribute negatively and are tallied separately.
VolumeResult cell_volume(const Region& region, const CellPatch& patch, double wavelength_nm);

/// Nucleus block given the selected nucleus and the cell's other structures.
NucleusFeatures nuclear_features(const Region& cell, const VolumeResult& cell_vol,
                                 const NucleusResult& nucleus_result,
                                 const std::vector<InternalStructure>& structures,
                                 const CellPatch& patch, double wavelength_nm);

/// Assembles the full per-cell record.
FeatureRecord assemble_record(std::string image_id, std::string cell_id, const Region& cell,
                              bool border, bool internal_skipped,
                              const std::vector<InternalStructure>& structures,
                              const NucleusResult& nucleus_result, const CellPatch& patch,
                              double wavelength_nm);

} // namespace qpmseg

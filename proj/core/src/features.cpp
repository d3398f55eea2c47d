#include "qpmseg/features.hpp"

#include <algorithm>
#include <cmath>

namespace qpmseg {

namespace {

constexpr double pi = 3.141592653589793238462643383279;

double area_score(double cell_area, double shape_area) {
    if (cell_area <= 0.0 || shape_area <= 0.0) return 0.0;
    return std::min(cell_area, shape_area) / std::max(cell_area, shape_area);
}

} // namespace

std::optional<ShapeScores> shape_scores(const Region& region) {
    if (region.perimeter_um <= 0.0) return std::nullopt;

    const double area = region.area_um2;
    const double s = region.pixel_size_um;

    ShapeScores scores;
    const double iso_circle = region.perimeter_um * region.perimeter_um / (4.0 * pi);
    scores.circularity = area_score(area, iso_circle);

    const double r = region.enclosing_circle_um.radius;
    scores.roundness = area_score(area, pi * r * r);

    scores.polygonality = area_score(area, convex_hull_area_um2(region));

    const double half_w = 0.5 * region.bbox.width() * s;
    const double half_h = 0.5 * region.bbox.height() * s;
    scores.ellipticity = area_score(area, pi * half_w * half_h);
    return scores;
}

VolumeResult cell_volume(const Region& region, const CellPatch& patch, double wavelength_nm) {
    const double px_area = region.pixel_size_um * region.pixel_size_um;
    double positive = 0.0;
    double negative = 0.0;
    for (const PixelCoord& p : region.pixels) {
        const double v = phase_to_density_um(patch.at(p.x, p.y), wavelength_nm) * px_area;
        if (v >= 0.0) {
            positive += v;
        } else {
            negative += v;
        }
    }
    VolumeResult result;
    result.volume_um3 = positive + negative;
    const double total_abs = positive - negative;
    result.negative_fraction = total_abs > 0.0 ? -negative / total_abs : 0.0;
    return result;
}

NucleusFeatures nuclear_features(const Region& cell, const VolumeResult& cell_vol,
                                 const NucleusResult& nucleus_result,
                                 const std::vector<InternalStructure>& structures,
                                 const CellPatch& patch, double wavelength_nm) {
    const InternalStructure& nucleus = nucleus_result.nucleus();
    const Region& nr = nucleus.region;

    NucleusFeatures f;
    f.diameter_um = nr.enclosing_diameter_um();
    f.area_um2 = nr.area_um2;
    if (auto s = shape_scores(nr)) {
        f.circularity = s->circularity;
        f.roundness = s->roundness;
    }
    f.offset_um = distance(nr.centroid_um, cell.centroid_um);
    f.area_ratio = nr.area_um2 / cell.area_um2;

    const VolumeResult nucleus_vol = cell_volume(nr, patch, wavelength_nm);
    f.volume_um3 = nucleus_vol.volume_um3;
    f.volume_ratio = cell_vol.volume_um3 != 0.0 ? nucleus_vol.volume_um3 / cell_vol.volume_um3 : 0.0;

    // Structures other than the nucleus whose pixels all lie inside it.
    for (const InternalStructure& s : structures) {
        if (s.region.pixels == nr.pixels) continue;
        if (s.region.area_px > nr.area_px) continue;
        const bool inside = std::includes(nr.pixels.begin(), nr.pixels.end(),
                                          s.region.pixels.begin(), s.region.pixels.end());
        if (inside) ++f.structures_inside;
    }

    f.max_density_um = nucleus.max_density_um;
    f.mean_density_um = nucleus.mean_density_um;
    f.candidate_count = static_cast<int>(nucleus_result.candidates.size());
    return f;
}

FeatureRecord assemble_record(std::string image_id, std::string cell_id, const Region& cell,
                              bool border, bool internal_skipped,
                              const std::vector<InternalStructure>& structures,
                              const NucleusResult& nucleus_result, const CellPatch& patch,
                              double wavelength_nm) {
    FeatureRecord rec;
    rec.image_id = std::move(image_id);
    rec.cell_id = std::move(cell_id);
    rec.centroid_um = cell.centroid_um;
    rec.bbox = cell.bbox;
    rec.area_px = cell.area_px;
    rec.area_um2 = cell.area_um2;
    rec.diameter_um = cell.enclosing_diameter_um();
    rec.perimeter_um = cell.perimeter_um;
    rec.scores = shape_scores(cell);

    const VolumeResult vol = cell_volume(cell, patch, wavelength_nm);
    rec.volume_um3 = vol.volume_um3;
    rec.negative_volume_fraction = vol.negative_fraction;

    rec.structure_count = static_cast<int>(structures.size());
    rec.border = border;
    rec.internal_skipped = internal_skipped;
    rec.abnormal_or_aggregate = nucleus_result.abnormal_or_aggregate;
    if (nucleus_result.has_nucleus()) {
        rec.nucleus =
            nuclear_features(cell, vol, nucleus_result, structures, patch, wavelength_nm);
    }
    return rec;
}

} // namespace qpmseg

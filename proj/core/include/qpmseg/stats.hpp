#pragma once

#include "qpmseg/config.hpp"
#include "qpmseg/image.hpp"

#include <string>
#include <vector>

namespace qpmseg {

/// The four per-image statistics gathered in pass 1.
struct ImageStats {
    std::string image_id;
    double phase_min = 0.0;
    double phase_max = 0.0;
    double phase_mean = 0.0;
    /// Background estimate: center of the most populated histogram bin.
    double background = 0.0;
};

/// Measurement-wide aggregates derived from the kept per-image statistics.
struct MeasurementStats {
    /// Number of images entering the threshold reduction (artifact images excluded).
    std::size_t n_images = 0;
    /// Arithmetic mean of per-image backgrounds.
    double background_mean = 0.0;
    /// Cell threshold t = 2 * |background_mean|.
    double threshold = 0.0;
    /// Statistics of every input image, in input order (kept and filtered).
    std::vector<ImageStats> per_image;
    /// Ids of images discarded as measurement artifacts.
    std::vector<std::string> filtered_ids;
};

/// Single pass over all samples: min / max / mean plus the histogram-mode
/// background. Bins of `bin_width_rad` span [min, max]; ties between equally
/// populated bins resolve toward the bin center nearest the mean.
ImageStats image_stats(const PhaseImage& img, double bin_width_rad);

/// Partition into (kept, filtered). An image is an artifact when its minimum
/// phase reaches -pi (wrap signature) or its background deviates from the
/// measurement median by more than background_sigma_factor MAD-scaled units.
/// Input order is preserved in both outputs. Throws EmptyMeasurementError.
std::pair<std::vector<ImageStats>, std::vector<ImageStats>>
filter_artifact_images(const std::vector<ImageStats>& all, const Config& cfg);

/// Threshold reduction over the kept images, in the given order:
/// background_mean = (1/N) * sum(background_i), threshold = 2 * |background_mean|.
/// Throws EmptyMeasurementError on empty input and DegenerateThresholdError
/// when the threshold comes out exactly zero.
MeasurementStats measurement_threshold(const std::vector<ImageStats>& kept);

} // namespace qpmseg

#include "qpmseg/stats.hpp"

#include "qpmseg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace qpmseg {

namespace {

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + n / 2;
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

} // namespace

ImageStats image_stats(const PhaseImage& img, double bin_width_rad) {
    ImageStats s;
    s.image_id = img.id();

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (float v : img.samples()) {
        const double d = v;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        sum += d;
    }
    s.phase_min = lo;
    s.phase_max = hi;
    s.phase_mean = sum / static_cast<double>(img.pixel_count());

    const double range = hi - lo;
    if (range == 0.0) {
        s.background = lo;
        return s;
    }
    const auto n_bins = static_cast<std::size_t>(std::ceil(range / bin_width_rad));
    std::vector<std::uint32_t> counts(n_bins, 0);
    for (float v : img.samples()) {
        auto bin = static_cast<std::size_t>((static_cast<double>(v) - lo) / bin_width_rad);
        counts[std::min(bin, n_bins - 1)]++;
    }
    auto bin_center = [&](std::size_t b) { return lo + (static_cast<double>(b) + 0.5) * bin_width_rad; };
    std::size_t best = 0;
    for (std::size_t b = 1; b < n_bins; ++b) {
        if (counts[b] > counts[best] ||
            (counts[b] == counts[best] &&
             std::abs(bin_center(b) - s.phase_mean) < std::abs(bin_center(best) - s.phase_mean))) {
            best = b;
        }
    }
    s.background = bin_center(best);
    return s;
}

std::pair<std::vector<ImageStats>, std::vector<ImageStats>>
filter_artifact_images(const std::vector<ImageStats>& all, const Config& cfg) {
    if (all.empty()) throw EmptyMeasurementError("filter_artifact_images: no images");

    constexpr double pi = 3.141592653589793238462643383279;
    constexpr double mad_to_sigma = 1.4826;

    std::vector<double> backgrounds;
    backgrounds.reserve(all.size());
    for (const ImageStats& s : all) backgrounds.push_back(s.background);
    const double med = median_of(backgrounds);

    std::vector<double> deviations;
    deviations.reserve(all.size());
    for (double b : backgrounds) deviations.push_back(std::abs(b - med));
    // Backgrounds are histogram-mode estimates quantized to bin centers, so
    // the spread never resolves below one bin width; without the floor a
    // measurement whose modes all agree would flag any one-bin deviation.
    const double spread =
        std::max(mad_to_sigma * median_of(deviations), cfg.histogram_bin_width_rad);

    std::vector<ImageStats> kept, filtered;
    for (const ImageStats& s : all) {
        const bool wrap = s.phase_min <= -pi;
        const bool outlier = std::abs(s.background - med) > cfg.background_sigma_factor * spread;
        (wrap || outlier ? filtered : kept).push_back(s);
    }
    return {std::move(kept), std::move(filtered)};
}

MeasurementStats measurement_threshold(const std::vector<ImageStats>& kept) {
    if (kept.empty()) throw EmptyMeasurementError("measurement_threshold: no images kept");

    double sum = 0.0;
    for (const ImageStats& s : kept) sum += s.background;

    MeasurementStats m;
    m.n_images = kept.size();
    m.background_mean = sum / static_cast<double>(kept.size());
    m.threshold = 2.0 * std::abs(m.background_mean);
    m.per_image = kept;
    if (m.threshold == 0.0) {
        throw DegenerateThresholdError(
            "measurement_threshold: all backgrounds are zero; supply a fallback threshold");
    }
    return m;
}

} // namespace qpmseg

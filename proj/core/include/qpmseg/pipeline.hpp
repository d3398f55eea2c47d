#pragma once

#include "qpmseg/config.hpp"
#include "qpmseg/features.hpp"
#include "qpmseg/image.hpp"
#include "qpmseg/image_io.hpp"
#include "qpmseg/internal.hpp"
#include "qpmseg/plausibility.hpp"
#include "qpmseg/stats.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace qpmseg {

/// Ordered access to the images of one measurement. Implementations must be
/// safe to call from several workers at once; the index order defines the
/// measurement order and with it every reduction in the pipeline.
class ImageSource {
public:
    virtual ~ImageSource() = default;
    virtual std::size_t count() const = 0;
    virtual std::string id(std::size_t index) const = 0;
    /// May throw LoadError; the pipeline skips the image and keeps going.
    virtual std::shared_ptr<const PhaseImage> load(std::size_t index) const = 0;
};

/// Images already in memory (tests, phantom runs).
class MemoryImageSource final : public ImageSource {
public:
    explicit MemoryImageSource(std::vector<PhaseImage> images);

    std::size_t count() const override { return images_.size(); }
    std::string id(std::size_t index) const override { return images_[index]->id(); }
    std::shared_ptr<const PhaseImage> load(std::size_t index) const override {
        return images_[index];
    }

private:
    std::vector<std::shared_ptr<const PhaseImage>> images_;
};

/// Images on disk; files are re-read on every pass so memory stays bounded
/// by cells, not images.
class DirectoryImageSource final : public ImageSource {
public:
    DirectoryImageSource(std::filesystem::path dir, Calibration cal);

    std::size_t count() const override { return files_.size(); }
    std::string id(std::size_t index) const override;
    std::shared_ptr<const PhaseImage> load(std::size_t index) const override;
    const std::vector<std::filesystem::path>& files() const { return files_; }

private:
    std::vector<std::filesystem::path> files_;
    Calibration cal_;
};

struct PipelineOptions {
    int workers = 1;
    /// Disables the three plausibility checks (ablation runs).
    bool plausibility_checks = true;
    /// Used when the automatic threshold is degenerate (all backgrounds zero).
    std::optional<double> fallback_threshold;
    bool render_overlays = false;
    bool stats_dump = false;
    /// When set, features.csv / features.jsonl / manifest.json (and optional
    /// overlays and stats dump) are written here.
    std::filesystem::path out_dir;
};

struct ImageReject {
    std::string image_id;
    Region region;
    RejectReason reason;
};

/// One accepted cell with everything downstream consumers need.
struct CellRecord {
    std::string image_id;
    std::string cell_id;
    Region region;
    bool border = false;
    bool internal_skipped = true;
    double max_phase = 0.0;
    std::vector<InternalStructure> structures;
    NucleusResult nucleus;
    FeatureRecord features;
};

struct RunCounts {
    std::size_t images_found = 0;
    std::size_t images_loaded = 0;
    std::size_t images_failed = 0;
    std::size_t images_filtered = 0;
    std::size_t candidates = 0;
    std::size_t cells = 0;
    std::size_t rejects_too_small = 0;
    std::size_t rejects_nested = 0;
    std::size_t rejects_no_gradient = 0;
    std::size_t cells_with_nucleus = 0;
    std::size_t cells_flagged = 0;
    std::size_t cells_internal_skipped = 0;
    std::size_t cells_border = 0;
};

struct RunTimings {
    double pass1_s = 0.0;
    double pass2_s = 0.0;
    double pass3_s = 0.0;
    double total_s = 0.0;
    std::optional<double> per_image_mean_s;
    std::optional<double> per_cell_mean_s;
};

struct RunManifest {
    std::string input;
    Config config;
    int workers = 1;
    bool plausibility_checks = true;
    double threshold = 0.0;
    double background_mean = 0.0;
    bool used_fallback_threshold = false;
    bool internal_stage_skipped = false;
    std::vector<std::string> filtered_ids;
    std::vector<std::string> failed_ids;
    RunCounts counts;
    RunTimings timings;
};

/// Manifest as JSON text. Timing fields are the only part that varies
/// between identical runs.
std::string manifest_json(const RunManifest& manifest);

struct PipelineResult {
    std::vector<CellRecord> records; ///< sorted by (image_id, top-left)
    std::vector<ImageReject> rejects;
    MeasurementStats stats;
    RunManifest manifest;
};

/// The full three-pass run: statistics + threshold, detection + checks,
/// internal structures + features. Output is bit-identical for any worker
/// count. Throws NoImagesError / DegenerateThresholdError (unless a fallback
/// threshold is configured).
PipelineResult run_pipeline(const ImageSource& source, const Config& cfg,
                            const PipelineOptions& options);

/// Convenience wrapper over a DirectoryImageSource.
PipelineResult run_pipeline(const std::filesystem::path& input_dir, const Calibration& cal,
                            const Config& cfg, const PipelineOptions& options);

} // namespace qpmseg

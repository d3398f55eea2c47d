#include "qpmseg/pipeline.hpp"

#include "qpmseg/errors.hpp"
#include "qpmseg/export.hpp"
#include "qpmseg/overlay.hpp"
#include "qpmseg/parallel.hpp"
#include "qpmseg/segment.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <unordered_set>
#include <utility>

namespace qpmseg {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string make_cell_id(const std::string& image_id, std::size_t index) {
    char suffix[16];
    std::snprintf(suffix, sizeof(suffix), "#%03zu", index + 1);
    return image_id + suffix;
}

// Work kept per accepted cell between pass 2 and pass 3. The patch holds the
// phase samples of the cell's bounding box so pass 3 never re-reads images.
struct CellWork {
    std::size_t image_index = 0;
    std::string image_id;
    double wavelength_nm = 0.0;
    Region region;
    bool border = false;
    CellPatch patch;
    double max_phase = 0.0;
};

struct ImageDetection {
    bool loaded = false;
    std::vector<CellWork> cells;
    std::vector<ImageReject> rejects;
};

void render_overlays_impl(const ImageSource& source, const PipelineResult& result,
                          const PipelineOptions& options);

} // namespace

MemoryImageSource::MemoryImageSource(std::vector<PhaseImage> images) {
    images_.reserve(images.size());
    for (PhaseImage& img : images) {
        images_.push_back(std::make_shared<const PhaseImage>(std::move(img)));
    }
}

DirectoryImageSource::DirectoryImageSource(std::filesystem::path dir, Calibration cal)
    : files_(list_image_files(dir)), cal_(cal) {}

std::string DirectoryImageSource::id(std::size_t index) const {
    return files_[index].stem().string();
}

std::shared_ptr<const PhaseImage> DirectoryImageSource::load(std::size_t index) const {
    return std::make_shared<const PhaseImage>(load_image(files_[index], cal_));
}

std::string manifest_json(const RunManifest& m) {
    json j;
    j["input"] = m.input;
    j["config"] = {{"r_min_um", m.config.r_min_um},
                   {"d_internal_min_um", m.config.d_internal_min_um},
                   {"min_structure_px", m.config.min_structure_px},
                   {"histogram_bin_width_rad", m.config.histogram_bin_width_rad},
                   {"gradient_factor", m.config.gradient_factor},
                   {"gradient_boundary_fraction", m.config.gradient_boundary_fraction},
                   {"background_sigma_factor", m.config.background_sigma_factor},
                   {"connectivity", Config::connectivity}};
    j["workers"] = m.workers;
    j["plausibility_checks"] = m.plausibility_checks;
    j["threshold_rad"] = m.threshold;
    j["background_mean_rad"] = m.background_mean;
    j["used_fallback_threshold"] = m.used_fallback_threshold;
    j["internal_stage_skipped"] = m.internal_stage_skipped;
    j["filtered_image_ids"] = m.filtered_ids;
    j["failed_image_ids"] = m.failed_ids;
    j["counts"] = {{"images_found", m.counts.images_found},
                   {"images_loaded", m.counts.images_loaded},
                   {"images_failed", m.counts.images_failed},
                   {"images_filtered", m.counts.images_filtered},
                   {"candidates", m.counts.candidates},
                   {"cells", m.counts.cells},
                   {"rejects_too_small", m.counts.rejects_too_small},
                   {"rejects_nested", m.counts.rejects_nested},
                   {"rejects_no_gradient", m.counts.rejects_no_gradient},
                   {"cells_with_nucleus", m.counts.cells_with_nucleus},
                   {"cells_flagged_abnormal_or_aggregate", m.counts.cells_flagged},
                   {"cells_internal_skipped", m.counts.cells_internal_skipped},
                   {"cells_border", m.counts.cells_border}};
    j["timings"] = {{"pass1_s", m.timings.pass1_s},
                    {"pass2_s", m.timings.pass2_s},
                    {"pass3_s", m.timings.pass3_s},
                    {"total_s", m.timings.total_s}};
    j["timings"]["per_image_mean_s"] =
        m.timings.per_image_mean_s ? json(*m.timings.per_image_mean_s) : json(nullptr);
    j["timings"]["per_cell_mean_s"] =
        m.timings.per_cell_mean_s ? json(*m.timings.per_cell_mean_s) : json(nullptr);
    j["score_definitions"] = {
        {"circularity", "min/max area ratio vs isoperimetric circle (perimeter^2 / 4pi)"},
        {"roundness", "min/max area ratio vs minimal enclosing circle of pixel centers"},
        {"polygonality", "min/max area ratio vs convex hull over pixel corners"},
        {"ellipticity", "min/max area ratio vs ellipse spanning the bounding box"},
        {"perimeter", "length of the midpoint-smoothed traced boundary polygon"},
        {"diameter", "enclosing-circle diameter"}};
    return j.dump(2) + "\n";
}

PipelineResult run_pipeline(const ImageSource& source, const Config& cfg,
                            const PipelineOptions& options) {
    cfg.validate();
    const std::size_t n_images = source.count();
    if (n_images == 0) throw NoImagesError("no loadable images in input");

    PipelineResult result;
    RunManifest& manifest = result.manifest;
    manifest.config = cfg;
    manifest.workers = options.workers;
    manifest.plausibility_checks = options.plausibility_checks;
    manifest.counts.images_found = n_images;

    const auto t_start = Clock::now();

    // ---- pass 1: per-image statistics, artifact filter, threshold ----
    struct StatSlot {
        bool ok = false;
        ImageStats stats;
    };
    std::vector<StatSlot> slots(n_images);
    parallel_for(n_images, options.workers, [&](std::size_t i) {
        try {
            const std::shared_ptr<const PhaseImage> img = source.load(i);
            slots[i].stats = image_stats(*img, cfg.histogram_bin_width_rad);
            slots[i].ok = true;
        } catch (const LoadError&) {
            slots[i].ok = false;
        }
    });

    std::vector<ImageStats> all_stats;
    all_stats.reserve(n_images);
    for (std::size_t i = 0; i < n_images; ++i) {
        if (slots[i].ok) {
            all_stats.push_back(slots[i].stats);
        } else {
            manifest.failed_ids.push_back(source.id(i));
        }
    }
    manifest.counts.images_loaded = all_stats.size();
    manifest.counts.images_failed = manifest.failed_ids.size();
    if (all_stats.empty()) throw NoImagesError("no loadable images in input");

    auto [kept, filtered] = filter_artifact_images(all_stats, cfg);
    for (const ImageStats& s : filtered) manifest.filtered_ids.push_back(s.image_id);
    manifest.counts.images_filtered = filtered.size();

    double threshold = 0.0;
    if (!kept.empty()) {
        try {
            MeasurementStats ms = measurement_threshold(kept);
            threshold = ms.threshold;
            result.stats = std::move(ms);
        } catch (const DegenerateThresholdError&) {
            if (!options.fallback_threshold) throw;
            threshold = *options.fallback_threshold;
            manifest.used_fallback_threshold = true;
            result.stats.n_images = kept.size();
            result.stats.background_mean = 0.0;
            result.stats.threshold = threshold;
        }
    }
    result.stats.per_image = all_stats;
    result.stats.filtered_ids = manifest.filtered_ids;
    manifest.threshold = threshold;
    manifest.background_mean = result.stats.background_mean;
    manifest.timings.pass1_s = seconds_since(t_start);

    // ---- pass 2: detection + plausibility checks per kept image ----
    const auto t_pass2 = Clock::now();
    std::vector<std::size_t> kept_indices;
    {
        std::unordered_set<std::string> kept_ids;
        kept_ids.reserve(kept.size());
        for (const ImageStats& s : kept) kept_ids.insert(s.image_id);
        for (std::size_t i = 0; i < n_images; ++i) {
            if (!slots[i].ok) continue;
            if (kept_ids.contains(source.id(i))) kept_indices.push_back(i);
        }
    }

    std::vector<ImageDetection> detections(kept_indices.size());
    if (!kept_indices.empty() && threshold > 0.0) {
        parallel_for(kept_indices.size(), options.workers, [&](std::size_t k) {
            ImageDetection& det = detections[k];
            std::shared_ptr<const PhaseImage> img;
            try {
                img = source.load(kept_indices[k]);
            } catch (const LoadError&) {
                return; // vanished between passes; counted as failed below
            }
            det.loaded = true;

            std::vector<Candidate> candidates = detect_candidates(*img, threshold, cfg);
            CheckOutcome outcome;
            if (options.plausibility_checks) {
                const GradientField grad = sobel_magnitude(*img);
                outcome = run_checks(grad, std::move(candidates), cfg);
            } else {
                outcome.cells = std::move(candidates);
            }

            for (RejectedCandidate& rej : outcome.rejects) {
                det.rejects.push_back(
                    {img->id(), std::move(rej.candidate.region), rej.reason});
            }
            det.cells.reserve(outcome.cells.size());
            for (Candidate& cell : outcome.cells) {
                CellWork work;
                work.image_index = kept_indices[k];
                work.image_id = img->id();
                work.wavelength_nm = img->wavelength_nm();
                work.border = cell.border;
                work.patch = crop_patch(*img, cell.region.bbox);
                double max_phase = -std::numeric_limits<double>::infinity();
                for (const PixelCoord& p : cell.region.pixels) {
                    max_phase = std::max(max_phase, static_cast<double>(work.patch.at(p.x, p.y)));
                }
                work.max_phase = max_phase;
                work.region = std::move(cell.region);
                det.cells.push_back(std::move(work));
            }
        });
    }

    std::vector<CellWork> cells;
    for (std::size_t k = 0; k < detections.size(); ++k) {
        ImageDetection& det = detections[k];
        if (!det.loaded && threshold > 0.0) {
            manifest.failed_ids.push_back(source.id(kept_indices[k]));
            manifest.counts.images_failed++;
            continue;
        }
        manifest.counts.candidates += det.cells.size() + det.rejects.size();
        for (ImageReject& r : det.rejects) {
            switch (r.reason) {
            case RejectReason::TooSmall: manifest.counts.rejects_too_small++; break;
            case RejectReason::Nested: manifest.counts.rejects_nested++; break;
            case RejectReason::NoGradientSupport: manifest.counts.rejects_no_gradient++; break;
            }
            result.rejects.push_back(std::move(r));
        }
        for (CellWork& c : det.cells) cells.push_back(std::move(c));
    }
    manifest.counts.cells = cells.size();
    manifest.timings.pass2_s = seconds_since(t_pass2);

    // ---- barrier: measurement-wide internal thresholds ----
    const auto t_pass3 = Clock::now();
    std::vector<double> cell_maxima;
    for (const CellWork& c : cells) {
        if (!c.border) cell_maxima.push_back(c.max_phase); // clipped maxima bias the mean low
    }

    std::optional<InternalThresholds> thresholds;
    if (!cell_maxima.empty() && threshold > 0.0) {
        thresholds = compute_internal_thresholds(threshold, cell_maxima);
    } else {
        manifest.internal_stage_skipped = true;
    }

    // ---- pass 3: internal structures + features per cell ----
    // Cell ids follow detection order within each image; both the merge above
    // and the sort below are deterministic, so ids are stable across runs.
    std::vector<std::string> cell_ids(cells.size());
    {
        std::size_t i = 0;
        while (i < cells.size()) {
            std::size_t j = i;
            while (j < cells.size() && cells[j].image_id == cells[i].image_id) ++j;
            for (std::size_t k = i; k < j; ++k) {
                cell_ids[k] = make_cell_id(cells[k].image_id, k - i);
            }
            i = j;
        }
    }

    result.records.resize(cells.size());
    parallel_for(cells.size(), options.workers, [&](std::size_t i) {
        CellWork& work = cells[i];
        CellRecord rec;
        rec.image_id = work.image_id;
        rec.cell_id = cell_ids[i];
        rec.border = work.border;
        rec.max_phase = work.max_phase;

        if (thresholds.has_value() && eligible_for_internal(work.region, cfg)) {
            rec.internal_skipped = false;
            rec.structures = detect_internal(work.region, work.patch, work.wavelength_nm,
                                             *thresholds, cfg);
            rec.nucleus = select_nucleus(rec.structures);
        }
        rec.features = assemble_record(rec.image_id, rec.cell_id, work.region, rec.border,
                                       rec.internal_skipped, rec.structures, rec.nucleus,
                                       work.patch, work.wavelength_nm);
        rec.region = std::move(work.region);
        result.records[i] = std::move(rec);
    });
    cells.clear();
    cells.shrink_to_fit(); // patches are no longer needed

    std::stable_sort(result.records.begin(), result.records.end(),
                     [](const CellRecord& a, const CellRecord& b) {
                         if (a.image_id != b.image_id) return a.image_id < b.image_id;
                         const PixelCoord pa{a.region.bbox.x_min, a.region.bbox.y_min};
                         const PixelCoord pb{b.region.bbox.x_min, b.region.bbox.y_min};
                         return pa < pb;
                     });

    for (const CellRecord& rec : result.records) {
        if (rec.nucleus.has_nucleus()) manifest.counts.cells_with_nucleus++;
        if (rec.nucleus.abnormal_or_aggregate) manifest.counts.cells_flagged++;
        if (rec.internal_skipped) manifest.counts.cells_internal_skipped++;
        if (rec.border) manifest.counts.cells_border++;
    }

    manifest.timings.pass3_s = seconds_since(t_pass3);
    manifest.timings.total_s = seconds_since(t_start);
    if (manifest.counts.images_loaded > 0) {
        manifest.timings.per_image_mean_s =
            manifest.timings.total_s / static_cast<double>(manifest.counts.images_loaded);
    }
    if (manifest.counts.cells > 0) {
        manifest.timings.per_cell_mean_s =
            manifest.timings.total_s / static_cast<double>(manifest.counts.cells);
    }

    // ---- optional file outputs ----
    if (!options.out_dir.empty()) {
        std::filesystem::create_directories(options.out_dir);
        std::vector<FeatureRecord> features;
        features.reserve(result.records.size());
        for (const CellRecord& rec : result.records) features.push_back(rec.features);
        write_text_file(options.out_dir / "features.csv", features_csv(features));
        write_text_file(options.out_dir / "features.jsonl", features_jsonl(features));
        write_text_file(options.out_dir / "manifest.json", manifest_json(manifest));
        if (options.stats_dump) {
            write_text_file(options.out_dir / "image_stats.csv", stats_csv(result.stats));
        }
        if (options.render_overlays) {
            render_overlays_impl(source, result, options);
        }
    }
    return result;
}

PipelineResult run_pipeline(const std::filesystem::path& input_dir, const Calibration& cal,
                            const Config& cfg, const PipelineOptions& options) {
    DirectoryImageSource source(input_dir, cal);
    PipelineResult result = run_pipeline(source, cfg, options);
    result.manifest.input = input_dir.string();
    if (!options.out_dir.empty()) {
        // Rewrite with the input path recorded.
        write_text_file(options.out_dir / "manifest.json", manifest_json(result.manifest));
    }
    return result;
}

namespace {

void render_overlays_impl(const ImageSource& source, const PipelineResult& result,
                          const PipelineOptions& options) {
    // Group records by image id once; each worker renders one image.
    std::vector<std::pair<std::string, std::vector<const CellRecord*>>> by_image;
    for (const CellRecord& rec : result.records) {
        if (by_image.empty() || by_image.back().first != rec.image_id) {
            by_image.push_back({rec.image_id, {}});
        }
        by_image.back().second.push_back(&rec);
    }

    const std::size_t n = source.count();
    parallel_for(n, options.workers, [&](std::size_t i) {
        const std::string image_id = source.id(i);
        std::shared_ptr<const PhaseImage> img;
        try {
            img = source.load(i);
        } catch (const LoadError&) {
            return;
        }
        std::vector<OverlayCell> cells;
        for (const auto& [id, recs] : by_image) {
            if (id != image_id) continue;
            for (const CellRecord* rec : recs) {
                OverlayCell oc;
                oc.cell = &rec->region;
                if (rec->nucleus.has_nucleus()) oc.nucleus = &rec->nucleus.nucleus().region;
                cells.push_back(oc);
            }
        }
        save_ppm(render_overlay(*img, cells), options.out_dir / (image_id + ".overlay.ppm"));
    });
}

} // namespace

} // namespace qpmseg

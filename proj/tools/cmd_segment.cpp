#include "commands.hpp"

#include "qpmseg/config.hpp"
#include "qpmseg/errors.hpp"
#include "qpmseg/export.hpp"
#include "qpmseg/pipeline.hpp"

#include <cstdio>
#include <memory>
#include <string>

namespace qpmseg::cli {

namespace {

struct SegmentArgs {
    std::string input_dir;
    std::string out_dir;
    double pixel_size_um = 0.0;
    double wavelength_nm = 528.0;
    std::string config_file;
    int workers = 1;
    bool overlays = false;
    bool stats_dump = false;
    bool disable_checks = false;
    double fallback_threshold = -1.0;
};

int run_segment(const SegmentArgs& args) {
    try {
        Config cfg;
        if (!args.config_file.empty()) cfg = load_config_file(args.config_file, cfg);
        cfg = apply_env_overrides(cfg);
        cfg.validate();

        Calibration cal;
        if (args.pixel_size_um > 0.0) cal.pixel_size_um = args.pixel_size_um;
        if (args.wavelength_nm > 0.0) cal.wavelength_nm = args.wavelength_nm;

        PipelineOptions options;
        options.workers = args.workers;
        options.render_overlays = args.overlays;
        options.stats_dump = args.stats_dump;
        options.plausibility_checks = !args.disable_checks;
        options.out_dir = args.out_dir;
        if (args.fallback_threshold > 0.0) options.fallback_threshold = args.fallback_threshold;

        const PipelineResult result = run_pipeline(args.input_dir, cal, cfg, options);
        const RunManifest& m = result.manifest;

        std::printf("images: %zu found, %zu loaded, %zu filtered, %zu failed\n",
                    m.counts.images_found, m.counts.images_loaded, m.counts.images_filtered,
                    m.counts.images_failed);
        std::printf("threshold: %.6g rad%s\n", m.threshold,
                    m.used_fallback_threshold ? " (fallback)" : "");
        std::printf("candidates: %zu -> cells: %zu (rejects: %zu small, %zu nested, %zu "
                    "gradient)\n",
                    m.counts.candidates, m.counts.cells, m.counts.rejects_too_small,
                    m.counts.rejects_nested, m.counts.rejects_no_gradient);
        std::printf("nuclei: %zu cells with nucleus, %zu flagged, %zu skipped internal\n",
                    m.counts.cells_with_nucleus, m.counts.cells_flagged,
                    m.counts.cells_internal_skipped);
        if (m.timings.per_image_mean_s) {
            std::printf("timing: %.4f s/image", *m.timings.per_image_mean_s);
            if (m.timings.per_cell_mean_s) {
                std::printf(", %.4f s/cell", *m.timings.per_cell_mean_s);
            } else {
                std::printf(", s/cell: n/a");
            }
            std::printf(" (total %.3f s)\n", m.timings.total_s);
        }
        if (!args.out_dir.empty()) {
            std::string log;
            for (const ImageReject& rej : result.rejects) {
                char line[160];
                std::snprintf(line, sizeof(line), "%s %s bbox=(%d,%d,%dx%d) area_px=%d\n",
                              rej.image_id.c_str(), to_string(rej.reason), rej.region.bbox.x_min,
                              rej.region.bbox.y_min, rej.region.bbox.width(),
                              rej.region.bbox.height(), rej.region.area_px);
                log += line;
            }
            write_text_file(std::filesystem::path(args.out_dir) / "rejects.log", log);
            std::printf("outputs written to %s\n", args.out_dir.c_str());
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const DegenerateThresholdError& e) {
        std::fprintf(stderr, "degenerate threshold: %s\n", e.what());
        return kExitDegenerateThreshold;
    } catch (const NoImagesError& e) {
        std::fprintf(stderr, "no images: %s\n", e.what());
        return kExitNoImages;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

} // namespace

void register_segment(CLI::App& app, int& exit_code) {
    auto args = std::make_shared<SegmentArgs>();
    CLI::App* cmd = app.add_subcommand("segment", "Segment a directory of phase images");
    cmd->add_option("input-dir", args->input_dir, "Directory of .raw/.tif phase images")
        ->required();
    cmd->add_option("--pixel-size-um", args->pixel_size_um,
                    "Pixel size in micrometers (overrides sidecar values)");
    cmd->add_option("--wavelength-nm", args->wavelength_nm,
                    "Light-source wavelength in nanometers (default 528)");
    cmd->add_option("--out", args->out_dir, "Output directory for CSV/JSONL/manifest")
        ->required();
    cmd->add_option("--config", args->config_file, "JSON config file");
    cmd->add_option("--workers", args->workers, "Worker threads (default 1)")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--overlays", args->overlays, "Render overlay images");
    cmd->add_flag("--stats-dump", args->stats_dump, "Write per-image statistics CSV");
    cmd->add_flag("--disable-checks", args->disable_checks,
                  "Skip the plausibility checks (ablation)");
    cmd->add_option("--fallback-threshold", args->fallback_threshold,
                    "Threshold in radians used when the automatic one is degenerate");
    cmd->callback([args, &exit_code] { exit_code = run_segment(*args); });
}

} // namespace qpmseg::cli

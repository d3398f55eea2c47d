#include "commands.hpp"

#include "qpmseg/errors.hpp"
#include "qpmseg/evaluate.hpp"
#include "qpmseg/export.hpp"
#include "qpmseg/phantom.hpp"
#include "qpmseg/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <thread>

namespace qpmseg::cli {

namespace {

namespace fs = std::filesystem;

// CLI options bind straight onto PhantomParams so the generator's defaults
// are the single source of truth.
void add_scene_options(CLI::App* cmd, PhantomParams& params) {
    cmd->add_option("--width", params.width, "Scene width in pixels");
    cmd->add_option("--height", params.height, "Scene height in pixels");
    cmd->add_option("--cells-min", params.cells_min, "Minimum cells per scene");
    cmd->add_option("--cells-max", params.cells_max, "Maximum cells per scene");
    cmd->add_option("--diameter-min-um", params.diameter_min_um, "Smallest cell diameter");
    cmd->add_option("--diameter-max-um", params.diameter_max_um, "Largest cell diameter");
    cmd->add_option("--peak-min", params.peak_phase_min, "Minimum cell peak phase (rad)");
    cmd->add_option("--peak-max", params.peak_phase_max, "Maximum cell peak phase (rad)");
    cmd->add_option("--pedestal", params.pedestal_phase, "Cell rim phase (rad)");
    cmd->add_option("--background", params.background_phase, "Background phase level (rad)");
    cmd->add_option("--noise-sigma", params.noise_sigma, "Gaussian noise sigma (rad)");
    cmd->add_option("--nucleus-contrast", params.nucleus_contrast,
                    "Nucleus amplitude as a multiple of the cell peak");
    cmd->add_option("--blob-peak", params.blob_peak_phase,
                    "Absolute phase level internal side blobs peak at (rad)");
    cmd->add_option("--blobs-per-cell", params.blobs_per_cell_max,
                    "Maximum internal side blobs per cell");
    cmd->add_option("--debris", params.debris_count, "Debris patches per scene");
    cmd->add_option("--pixel-size-um", params.pixel_size_um, "Pixel size");
    cmd->add_option("--wavelength-nm", params.wavelength_nm, "Wavelength");
}

std::string scene_id(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene_%04d", index);
    return buf;
}

// ---- generate -------------------------------------------------------------

struct GenerateArgs {
    PhantomParams scene;
    std::string out_dir;
    int scenes = 10;
    std::uint64_t seed = 1;
};

int run_generate(const GenerateArgs& args) {
    try {
        const PhantomParams& params = args.scene;
        for (int i = 0; i < args.scenes; ++i) {
            const PhantomScene scene =
                generate_phantom(params, args.seed + static_cast<std::uint64_t>(i), scene_id(i));
            save_scene(scene, args.out_dir);
        }
        std::printf("wrote %d scenes to %s\n", args.scenes, args.out_dir.c_str());
        return kExitOk;
    } catch (const Error& e) {
        std::fprintf(stderr, "phantom generate: %s\n", e.what());
        return 1;
    }
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
    std::string scenes_dir;
    std::string json_path;
    double iou = 0.5;
    double boundary_iou = 0.8;
    int workers = 1;
    bool disable_checks = false;
};

int run_evaluate(const EvaluateArgs& args) {
    try {
        Config cfg;
        cfg = apply_env_overrides(cfg);

        PipelineOptions options;
        options.workers = args.workers;
        options.plausibility_checks = !args.disable_checks;

        const PipelineResult result =
            run_pipeline(fs::path(args.scenes_dir), Calibration{}, cfg, options);

        // group records per image id
        EvalOptions eval_options{args.iou, args.boundary_iou};
        ErrorReport total;
        total.options = eval_options;
        std::size_t n_scenes = 0;
        for (const auto& entry : fs::directory_iterator(args.scenes_dir)) {
            const fs::path& p = entry.path();
            if (p.extension() != ".json" || p.string().find(".gt.json") == std::string::npos) {
                continue;
            }
            const SceneGroundTruth gt = load_ground_truth(p);
            std::vector<CellRecord> records;
            for (const CellRecord& rec : result.records) {
                if (rec.image_id == gt.image_id) records.push_back(rec);
            }
            accumulate(total, evaluate_scene(gt, records, eval_options));
            ++n_scenes;
        }
        if (n_scenes == 0) {
            std::fprintf(stderr, "phantom evaluate: no .gt.json files in %s\n",
                         args.scenes_dir.c_str());
            return kExitNoImages;
        }

        std::printf("%s", report_table(total).c_str());
        if (!args.json_path.empty()) {
            std::ofstream out(args.json_path);
            out << report_json(total);
            std::printf("report written to %s\n", args.json_path.c_str());
        }
        return kExitOk;
    } catch (const DegenerateThresholdError& e) {
        std::fprintf(stderr, "degenerate threshold: %s\n", e.what());
        return kExitDegenerateThreshold;
    } catch (const NoImagesError& e) {
        std::fprintf(stderr, "no images: %s\n", e.what());
        return kExitNoImages;
    } catch (const Error& e) {
        std::fprintf(stderr, "phantom evaluate: %s\n", e.what());
        return 1;
    }
}

// ---- bench ------------------------------------------------------------------

struct BenchArgs {
    PhantomParams scene;
    int images = 100;
    int reps = 3;
    int workers = 1;
    std::uint64_t seed = 77;
};

std::string cpu_model() {
    std::ifstream info("/proc/cpuinfo");
    std::string line;
    while (std::getline(info, line)) {
        if (line.rfind("model name", 0) == 0) {
            const auto colon = line.find(':');
            if (colon != std::string::npos) return line.substr(colon + 2);
        }
    }
    return "unknown cpu";
}

int run_bench(const BenchArgs& args) {
    try {
        const PhantomParams& params = args.scene;
        std::vector<PhaseImage> images;
        images.reserve(static_cast<std::size_t>(args.images));
        for (int i = 0; i < args.images; ++i) {
            images.push_back(
                generate_phantom(params, args.seed + static_cast<std::uint64_t>(i), scene_id(i))
                    .image);
        }
        MemoryImageSource source(std::move(images));

        Config cfg;
        PipelineOptions options;
        options.workers = args.workers;

        // warm-up run, then timed repetitions
        std::size_t cells = run_pipeline(source, cfg, options).records.size();
        double best_total = 0.0;
        double sum_total = 0.0;
        const int reps = std::max(3, args.reps);
        for (int r = 0; r < reps; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            const PipelineResult result = run_pipeline(source, cfg, options);
            const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                  .count();
            cells = result.records.size();
            sum_total += dt;
            best_total = best_total == 0.0 ? dt : std::min(best_total, dt);
        }
        const double mean_total = sum_total / reps;
        const double per_image = mean_total / args.images;

        std::printf("machine: %s, %u hardware threads\n", cpu_model().c_str(),
                    std::thread::hardware_concurrency());
        std::printf("scenes: %d images %dx%d, %zu cells total, workers=%d, reps=%d\n",
                    args.images, params.width, params.height, cells, args.workers, reps);
        std::printf("per-image mean: %.4f s (best run %.4f s); reference 0.3 s/image\n",
                    per_image, best_total / args.images);
        if (cells > 0) {
            std::printf("per-cell mean: %.4f s; reference 0.113 s/cell\n",
                        mean_total / static_cast<double>(cells));
        } else {
            std::printf("per-cell mean: n/a (no cells)\n");
        }
        return kExitOk;
    } catch (const Error& e) {
        std::fprintf(stderr, "phantom bench: %s\n", e.what());
        return 1;
    }
}

} // namespace

void register_phantom(CLI::App& app, int& exit_code) {
    CLI::App* phantom = app.add_subcommand("phantom", "Synthetic scenes and evaluation");
    phantom->require_subcommand(1);

    auto gen = std::make_shared<GenerateArgs>();
    CLI::App* generate = phantom->add_subcommand("generate", "Write phantom scenes + ground truth");
    generate->add_option("--out", gen->out_dir, "Output directory")->required();
    generate->add_option("--scenes", gen->scenes, "Number of scenes")->check(CLI::PositiveNumber);
    generate->add_option("--seed", gen->seed, "Base seed");
    add_scene_options(generate, gen->scene);
    generate->callback([gen, &exit_code] { exit_code = run_generate(*gen); });

    auto ev = std::make_shared<EvaluateArgs>();
    CLI::App* evaluate = phantom->add_subcommand(
        "evaluate", "Run the pipeline on saved scenes and score the six error classes");
    evaluate->add_option("scenes-dir", ev->scenes_dir, "Directory written by generate")
        ->required();
    evaluate->add_option("--iou", ev->iou, "Matching IoU threshold (default 0.5)");
    evaluate->add_option("--boundary-iou", ev->boundary_iou,
                         "Poor-boundary IoU threshold (default 0.8)");
    evaluate->add_option("--workers", ev->workers, "Worker threads");
    evaluate->add_flag("--disable-checks", ev->disable_checks, "Skip plausibility checks");
    evaluate->add_option("--json", ev->json_path, "Also write the report as JSON");
    evaluate->callback([ev, &exit_code] { exit_code = run_evaluate(*ev); });

    auto bench = std::make_shared<BenchArgs>();
    CLI::App* bench_cmd =
        phantom->add_subcommand("bench", "Throughput benchmark on in-memory scenes");
    bench_cmd->add_option("--images", bench->images, "Images per run")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--reps", bench->reps, "Timed repetitions (minimum 3)");
    bench_cmd->add_option("--workers", bench->workers, "Worker threads");
    bench_cmd->add_option("--seed", bench->seed, "Base seed");
    add_scene_options(bench_cmd, bench->scene);
    bench_cmd->callback([bench, &exit_code] { exit_code = run_bench(*bench); });
}

} // namespace qpmseg::cli

#include "qpmseg/phantom.hpp"

#include "qpmseg/errors.hpp"
#include "qpmseg/image_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace qpmseg {

namespace {

using nlohmann::json;

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Pixels whose centers lie within `radius` of `center`, clipped to the image.
std::vector<PixelCoord> disk_mask(Vec2 center, double radius, int width, int height) {
    std::vector<PixelCoord> mask;
    const int x0 = std::max(0, static_cast<int>(std::floor(center.x - radius)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(center.x + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(center.y - radius)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(center.y + radius)));
    const double r2 = radius * radius;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - center.x;
            const double dy = y - center.y;
            if (dx * dx + dy * dy <= r2) mask.push_back({x, y});
        }
    }
    return mask;
}

struct Canvas {
    int width;
    int height;
    std::vector<double> phase;

    double& at(int x, int y) { return phase[static_cast<std::size_t>(y) * width + x]; }
};

// Adds amp * (1 - r^2/R^2) over the support disk.
void add_paraboloid(Canvas& canvas, Vec2 center, double radius, double amp, double pedestal) {
    const double r2 = radius * radius;
    for (const PixelCoord& p : disk_mask(center, radius, canvas.width, canvas.height)) {
        const double dx = p.x - center.x;
        const double dy = p.y - center.y;
        const double shape = 1.0 - (dx * dx + dy * dy) / r2;
        canvas.at(p.x, p.y) += pedestal + (amp - pedestal) * shape;
    }
}

json rle_encode(const std::vector<PixelCoord>& mask) {
    json rows = json::array();
    std::size_t i = 0;
    while (i < mask.size()) {
        std::size_t j = i + 1;
        while (j < mask.size() && mask[j].y == mask[i].y && mask[j].x == mask[j - 1].x + 1) ++j;
        rows.push_back({mask[i].y, mask[i].x, static_cast<int>(j - i)});
        i = j;
    }
    return rows;
}

std::vector<PixelCoord> rle_decode(const json& rows) {
    std::vector<PixelCoord> mask;
    for (const auto& row : rows) {
        const int y = row.at(0).get<int>();
        const int x0 = row.at(1).get<int>();
        const int len = row.at(2).get<int>();
        for (int k = 0; k < len; ++k) mask.push_back({x0 + k, y});
    }
    std::sort(mask.begin(), mask.end());
    return mask;
}

} // namespace

PhantomScene generate_phantom(const PhantomParams& params, std::uint64_t seed,
                              const std::string& image_id) {
    if (params.width < 8 || params.height < 8) throw Error("phantom: image too small");
    if (params.diameter_min_um > params.diameter_max_um || params.diameter_min_um <= 0.0) {
        throw Error("phantom: bad diameter range");
    }
    if (params.cells_min < 0 || params.cells_min > params.cells_max) {
        throw Error("phantom: bad cell count range");
    }

    std::mt19937_64 rng(seed);
    const double s = params.pixel_size_um;

    Canvas canvas{params.width, params.height,
                  std::vector<double>(static_cast<std::size_t>(params.width) * params.height,
                                      params.background_phase)};

    PhantomScene scene{PhaseImage("placeholder", 1, 1, {0.0f}, 1.0, 1.0), {}, {}, seed, params};

    // ---- place cells disjointly ----
    const int n_cells = uniform_int(rng, params.cells_min, params.cells_max);
    struct Placed {
        Vec2 center;
        double radius_px;
    };
    std::vector<Placed> placed;
    for (int c = 0; c < n_cells; ++c) {
        const double radius_um = 0.5 * uniform(rng, params.diameter_min_um, params.diameter_max_um);
        const double radius_px = radius_um / s;
        bool ok = false;
        Vec2 center;
        for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
            center = {uniform(rng, radius_px + 2.0, params.width - radius_px - 3.0),
                      uniform(rng, radius_px + 2.0, params.height - radius_px - 3.0)};
            ok = true;
            for (const Placed& other : placed) {
                if (distance(center, other.center) < radius_px + other.radius_px + 4.0) {
                    ok = false;
                    break;
                }
            }
        }
        if (!ok) {
            throw Error("phantom: could not place " + std::to_string(n_cells) +
                        " disjoint cells (overcrowded scene)");
        }
        placed.push_back({center, radius_px});

        PhantomCell cell;
        cell.center_px = center;
        cell.radius_px = radius_px;
        cell.peak_phase = uniform(rng, params.peak_phase_min, params.peak_phase_max);
        cell.mask = disk_mask(center, radius_px, params.width, params.height);
        add_paraboloid(canvas, center, radius_px, cell.peak_phase, params.pedestal_phase);

        // nucleus bump, fully inside the cell
        const double rn = radius_px * uniform(rng, params.nucleus_radius_fraction_min,
                                              params.nucleus_radius_fraction_max);
        const double max_offset = params.nucleus_offset_fraction_max * (radius_px - rn);
        const double offset = uniform(rng, 0.0, std::max(0.0, max_offset));
        const double angle = uniform(rng, 0.0, 2.0 * 3.14159265358979);
        const Vec2 n_center{center.x + offset * std::cos(angle),
                            center.y + offset * std::sin(angle)};
        cell.nucleus.center_px = n_center;
        cell.nucleus.radius_px = rn;
        cell.nucleus.amplitude = params.nucleus_contrast * cell.peak_phase;
        cell.nucleus.mask = disk_mask(n_center, rn, params.width, params.height);
        add_paraboloid(canvas, n_center, rn, cell.nucleus.amplitude, 0.0);

        // side blobs in the outer half of the cell, kept clear of the nucleus
        const int n_blobs = params.blobs_per_cell_max > 0
                                ? uniform_int(rng, 0, params.blobs_per_cell_max)
                                : 0;
        for (int b = 0; b < n_blobs; ++b) {
            const double rb = std::max(7.0, 0.12 * radius_px);
            bool blob_ok = false;
            Vec2 b_center;
            double rho = 0.0;
            for (int attempt = 0; attempt < 40 && !blob_ok; ++attempt) {
                rho = uniform(rng, 0.50, 0.65) * radius_px;
                const double phi = uniform(rng, 0.0, 2.0 * 3.14159265358979);
                b_center = {center.x + rho * std::cos(phi), center.y + rho * std::sin(phi)};
                blob_ok = rho + rb <= radius_px - 1.0 &&
                          distance(b_center, n_center) >= rn + rb + 3.0;
                for (const PhantomBlob& other : cell.blobs) {
                    blob_ok = blob_ok &&
                              distance(b_center, other.center_px) >= rb + other.radius_px + 3.0;
                }
            }
            if (!blob_ok) continue; // cramped cell; skip this blob
            const double cell_at_blob =
                params.pedestal_phase + (cell.peak_phase - params.pedestal_phase) *
                                            (1.0 - rho * rho / (radius_px * radius_px));
            const double amp = params.blob_peak_phase - cell_at_blob;
            if (amp <= 0.1) continue;
            PhantomBlob blob;
            blob.center_px = b_center;
            blob.radius_px = rb;
            blob.amplitude = amp;
            blob.mask = disk_mask(b_center, rb, params.width, params.height);
            add_paraboloid(canvas, b_center, rb, blob.amplitude, 0.0);
            cell.blobs.push_back(std::move(blob));
        }
        scene.cells.push_back(std::move(cell));
    }

    // ---- debris: diffuse speckle mounds plus sub-minimum speckle dots ----
    for (int d = 0; d < params.debris_count; ++d) {
        const bool small = (d % 3) == 2;
        const double sigma_px = small ? 0.0 : uniform(rng, 5.0, 9.0) / s;
        const double extent = small ? uniform(rng, 1.5, 2.4) / s : 2.2 * sigma_px;
        const double peak = small ? 0.32 : uniform(rng, 0.35, 0.5);

        Vec2 center;
        bool ok = false;
        for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
            center = {uniform(rng, extent + 2.0, params.width - extent - 3.0),
                      uniform(rng, extent + 2.0, params.height - extent - 3.0)};
            ok = true;
            for (const Placed& other : placed) {
                if (distance(center, other.center) < extent + other.radius_px + 6.0) {
                    ok = false;
                    break;
                }
            }
        }
        if (!ok) continue; // no room for this patch; the scene just has fewer

        placed.push_back({center, extent});
        PhantomDebris debris;
        debris.center_px = center;
        debris.radius_px = extent;
        debris.kind = small ? "small" : "diffuse";
        debris.mask = disk_mask(center, extent, params.width, params.height);
        for (const PixelCoord& p : debris.mask) {
            const double dx = p.x - center.x;
            const double dy = p.y - center.y;
            const double r2 = dx * dx + dy * dy;
            const double envelope =
                small ? peak : peak * std::exp(-r2 / (2.0 * sigma_px * sigma_px));
            const double speckle = uniform(rng, -0.3, 0.3);
            canvas.at(p.x, p.y) += envelope * (1.0 + speckle);
        }
        scene.debris.push_back(std::move(debris));
    }

    // wrap-artifact patch for filter tests
    if (params.add_wrap_patch) {
        const Vec2 center{params.width * 0.5, params.height * 0.5};
        for (const PixelCoord& p : disk_mask(center, 6.0, params.width, params.height)) {
            canvas.at(p.x, p.y) = -3.5;
        }
    }

    // ---- additive Gaussian noise, applied last ----
    if (params.noise_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, params.noise_sigma);
        for (double& v : canvas.phase) v += noise(rng);
    }

    std::vector<float> samples(canvas.phase.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i] = static_cast<float>(canvas.phase[i]);
    }
    std::string id = image_id;
    if (id.empty()) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "phantom_%06llu", static_cast<unsigned long long>(seed));
        id = buf;
    }
    scene.image = PhaseImage(id, params.width, params.height, std::move(samples), s,
                             params.wavelength_nm);
    return scene;
}

SceneGroundTruth ground_truth(const PhantomScene& scene) {
    SceneGroundTruth gt;
    gt.image_id = scene.image.id();
    gt.debris_count = scene.debris.size();
    for (const PhantomCell& cell : scene.cells) {
        SceneGroundTruth::Cell c;
        c.mask = cell.mask;
        c.nucleus_mask = cell.nucleus.mask;
        for (const PhantomBlob& blob : cell.blobs) c.blob_masks.push_back(blob.mask);
        gt.cells.push_back(std::move(c));
    }
    return gt;
}

void save_scene(const PhantomScene& scene, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    save_raw(scene.image, dir / (scene.image.id() + ".raw"));

    json j;
    j["schema"] = "qpmseg-phantom-gt-1";
    j["image_id"] = scene.image.id();
    j["seed"] = scene.seed;
    j["params"] = {{"width", scene.params.width},
                   {"height", scene.params.height},
                   {"pixel_size_um", scene.params.pixel_size_um},
                   {"wavelength_nm", scene.params.wavelength_nm},
                   {"background_phase", scene.params.background_phase},
                   {"noise_sigma", scene.params.noise_sigma},
                   {"cells_min", scene.params.cells_min},
                   {"cells_max", scene.params.cells_max},
                   {"diameter_min_um", scene.params.diameter_min_um},
                   {"diameter_max_um", scene.params.diameter_max_um},
                   {"peak_phase_min", scene.params.peak_phase_min},
                   {"peak_phase_max", scene.params.peak_phase_max},
                   {"pedestal_phase", scene.params.pedestal_phase},
                   {"nucleus_contrast", scene.params.nucleus_contrast},
                   {"blob_peak_phase", scene.params.blob_peak_phase},
                   {"blobs_per_cell_max", scene.params.blobs_per_cell_max},
                   {"debris_count_requested", scene.params.debris_count},
                   {"add_wrap_patch", scene.params.add_wrap_patch}};
    j["debris_count"] = scene.debris.size();
    j["cells"] = json::array();
    for (const PhantomCell& cell : scene.cells) {
        json jc;
        jc["center_px"] = {cell.center_px.x, cell.center_px.y};
        jc["radius_px"] = cell.radius_px;
        jc["peak_phase"] = cell.peak_phase;
        jc["mask_rle"] = rle_encode(cell.mask);
        jc["nucleus"] = {{"center_px", {cell.nucleus.center_px.x, cell.nucleus.center_px.y}},
                         {"radius_px", cell.nucleus.radius_px},
                         {"amplitude", cell.nucleus.amplitude},
                         {"mask_rle", rle_encode(cell.nucleus.mask)}};
        jc["blobs"] = json::array();
        for (const PhantomBlob& blob : cell.blobs) {
            jc["blobs"].push_back({{"center_px", {blob.center_px.x, blob.center_px.y}},
                                   {"radius_px", blob.radius_px},
                                   {"amplitude", blob.amplitude},
                                   {"mask_rle", rle_encode(blob.mask)}});
        }
        j["cells"].push_back(std::move(jc));
    }
    j["debris"] = json::array();
    for (const PhantomDebris& debris : scene.debris) {
        j["debris"].push_back({{"center_px", {debris.center_px.x, debris.center_px.y}},
                               {"radius_px", debris.radius_px},
                               {"kind", debris.kind},
                               {"mask_rle", rle_encode(debris.mask)}});
    }

    std::ofstream out(dir / (scene.image.id() + ".gt.json"));
    if (!out) throw Error("cannot write ground truth for " + scene.image.id());
    out << j.dump() << "\n";
}

SceneGroundTruth load_ground_truth(const std::filesystem::path& gt_json_path) {
    std::ifstream in(gt_json_path);
    if (!in) throw Error("cannot open " + gt_json_path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(gt_json_path.string() + ": " + e.what());
    }
    if (j.value("schema", "") != "qpmseg-phantom-gt-1") {
        throw Error(gt_json_path.string() + ": unknown ground-truth schema");
    }
    SceneGroundTruth gt;
    gt.image_id = j.at("image_id").get<std::string>();
    gt.debris_count = j.value("debris_count", 0u);
    for (const auto& jc : j.at("cells")) {
        SceneGroundTruth::Cell c;
        c.mask = rle_decode(jc.at("mask_rle"));
        c.nucleus_mask = rle_decode(jc.at("nucleus").at("mask_rle"));
        for (const auto& jb : jc.at("blobs")) {
            c.blob_masks.push_back(rle_decode(jb.at("mask_rle")));
        }
        gt.cells.push_back(std::move(c));
    }
    return gt;
}

} // namespace qpmseg

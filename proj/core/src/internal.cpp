#include "qpmseg/internal.hpp"

#include "qpmseg/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace qpmseg {

namespace {

struct TierSpec {
    int label;
    double threshold;
};

// Components of {p in cell : phase(p) >= threshold}, each at least min_px
// pixels, sorted pixels, ordered by topmost-leftmost pixel. Runs on the
// patch-local bitmap of the cell.
std::vector<std::vector<PixelCoord>> threshold_components(const Region& cell,
                                                          const CellPatch& patch,
                                                          double threshold, int min_px) {
    const PixelBox& box = cell.bbox;
    const int w = box.width();
    const int h = box.height();
    std::vector<std::uint8_t> fg(static_cast<std::size_t>(w) * h, 0);
    auto idx = [&](int x, int y) {
        return static_cast<std::size_t>(y - box.y_min) * w + (x - box.x_min);
    };
    const auto t = static_cast<float>(threshold);
    for (const PixelCoord& p : cell.pixels) {
        if (patch.at(p.x, p.y) >= t) fg[idx(p.x, p.y)] = 1;
    }

    std::vector<std::vector<PixelCoord>> components;
    std::vector<std::uint8_t> visited(fg.size(), 0);
    std::vector<PixelCoord> stack;
    for (int y = box.y_min; y <= box.y_max; ++y) {
        for (int x = box.x_min; x <= box.x_max; ++x) {
            if (!fg[idx(x, y)] || visited[idx(x, y)]) continue;
            std::vector<PixelCoord> comp;
            visited[idx(x, y)] = 1;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const PixelCoord p = stack.back();
                stack.pop_back();
                comp.push_back(p);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const PixelCoord q{p.x + dx, p.y + dy};
                        if (!box.contains(q)) continue;
                        if (!fg[idx(q.x, q.y)] || visited[idx(q.x, q.y)]) continue;
                        visited[idx(q.x, q.y)] = 1;
                        stack.push_back(q);
                    }
                }
            }
            if (static_cast<int>(comp.size()) >= min_px) {
                std::sort(comp.begin(), comp.end());
                components.push_back(std::move(comp));
            }
        }
    }
    return components;
}

} // namespace

bool InternalStructure::has_tier(int tier) const {
    return std::find(tiers.begin(), tiers.end(), tier) != tiers.end();
}

CellPatch crop_patch(const PhaseImage& img, const PixelBox& bbox) {
    CellPatch patch;
    patch.bbox = bbox;
    patch.width = bbox.width();
    patch.phase.resize(static_cast<std::size_t>(bbox.width()) * bbox.height());
    for (int y = bbox.y_min; y <= bbox.y_max; ++y) {
        for (int x = bbox.x_min; x <= bbox.x_max; ++x) {
            patch.phase[static_cast<std::size_t>(y - bbox.y_min) * patch.width +
                        (x - bbox.x_min)] = img.at(x, y);
        }
    }
    return patch;
}

InternalThresholds compute_internal_thresholds(double cell_threshold,
                                               const std::vector<double>& cell_max_phases) {
    if (cell_max_phases.empty()) {
        throw EmptyMeasurementError("compute_internal_thresholds: no detected cells");
    }
    double sum = 0.0;
    for (double m : cell_max_phases) sum += m;

    InternalThresholds th;
    th.mean_cell_max = sum / static_cast<double>(cell_max_phases.size());
    th.t1 = 4.0 * cell_threshold;
    th.t2 = 6.0 * cell_threshold;
    th.t3 = 0.8 * th.mean_cell_max;
    return th;
}

bool eligible_for_internal(const Region& cell, const Config& cfg) {
    return cell.enclosing_diameter_um() >= cfg.d_internal_min_um;
}

std::vector<InternalStructure> detect_internal(const Region& cell, const CellPatch& patch,
                                               double wavelength_nm,
                                               const InternalThresholds& th, const Config& cfg) {
    // Strictest threshold first: structures are seeded by their densest core.
    // A looser component containing exactly one seed is the same structure
    // seen at a milder threshold, so it becomes the structure's new extent; a
    // component containing several seeds only annotates their tier sets, which
    // keeps e.g. two nuclei inside one cytoplasmic component separate.
    std::array<TierSpec, 3> tiers{{{3, th.t3}, {2, th.t2}, {1, th.t1}}};
    std::sort(tiers.begin(), tiers.end(),
              [](const TierSpec& a, const TierSpec& b) { return a.threshold > b.threshold; });

    struct Seed {
        PixelCoord anchor;              // a core pixel, stable across tiers
        std::vector<PixelCoord> extent; // grows while the structure stays separate
        std::vector<int> tiers;
    };
    std::vector<Seed> seeds;
    for (const TierSpec& tier : tiers) {
        for (auto& comp : threshold_components(cell, patch, tier.threshold, cfg.min_structure_px)) {
            // Threshold nesting means "contains the seed's anchor pixel" is
            // equivalent to full containment of the seed's core.
            std::vector<std::size_t> inside;
            for (std::size_t i = 0; i < seeds.size(); ++i) {
                if (std::binary_search(comp.begin(), comp.end(), seeds[i].anchor)) {
                    inside.push_back(i);
                }
            }
            if (inside.empty()) {
                seeds.push_back({comp.front(), std::move(comp), {tier.label}});
                continue;
            }
            for (std::size_t i : inside) {
                Seed& s = seeds[i];
                if (s.tiers.empty() || s.tiers.back() != tier.label) s.tiers.push_back(tier.label);
            }
            if (inside.size() == 1) seeds[inside[0]].extent = std::move(comp);
        }
    }

    std::vector<InternalStructure> structures;
    structures.reserve(seeds.size());
    for (Seed& s : seeds) {
        InternalStructure st;
        std::sort(s.tiers.begin(), s.tiers.end());
        st.tiers = std::move(s.tiers);
        double sum = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const PixelCoord& p : s.extent) {
            const double d = phase_to_density_um(patch.at(p.x, p.y), wavelength_nm);
            sum += d;
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        // a uniform field means exactly equal mean and max
        st.mean_density_um = lo == hi ? hi : sum / static_cast<double>(s.extent.size());
        st.max_density_um = hi;
        st.region = region_from_pixels(std::move(s.extent), cell.pixel_size_um);
        structures.push_back(std::move(st));
    }
    std::sort(structures.begin(), structures.end(),
              [](const InternalStructure& a, const InternalStructure& b) {
                  return a.region.pixels.front() < b.region.pixels.front();
              });
    return structures;
}

NucleusResult select_nucleus(std::vector<InternalStructure> structures) {
    NucleusResult result;
    if (structures.empty()) return result;

    if (structures.size() == 1) {
        result.candidates = std::move(structures);
        result.nucleus_index = 0;
        return result;
    }

    std::vector<InternalStructure> tier3;
    for (const InternalStructure& s : structures) {
        if (s.has_tier(3)) tier3.push_back(s);
    }

    if (tier3.size() == 1) {
        result.candidates = std::move(tier3);
        result.nucleus_index = 0;
        return result;
    }

    result.abnormal_or_aggregate = tier3.size() > 1;
    result.candidates = tier3.empty() ? std::move(structures) : std::move(tier3);

    // Highest mean optical density wins; ties fall to larger area, then to
    // the topmost-leftmost region. Total order, so permutation-stable.
    std::size_t best = 0;
    for (std::size_t i = 1; i < result.candidates.size(); ++i) {
        const InternalStructure& a = result.candidates[i];
        const InternalStructure& b = result.candidates[best];
        const bool wins =
            a.mean_density_um != b.mean_density_um ? a.mean_density_um > b.mean_density_um
            : a.region.area_px != b.region.area_px ? a.region.area_px > b.region.area_px
                                                   : a.region.pixels.front() < b.region.pixels.front();
        if (wins) best = i;
    }
    result.nucleus_index = best;
    return result;
}

} // namespace qpmseg

#include "qpmseg/evaluate.hpp"

#include "qpmseg/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>

namespace qpmseg {

namespace {

using nlohmann::json;

std::size_t mask_intersection(std::span<const PixelCoord> a, std::span<const PixelCoord> b) {
    std::size_t i = 0, j = 0, common = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            ++common;
            ++i;
            ++j;
        }
    }
    return common;
}

} // namespace

double mask_iou(std::span<const PixelCoord> a, std::span<const PixelCoord> b) {
    if (a.empty() && b.empty()) return 0.0;
    const std::size_t common = mask_intersection(a, b);
    const std::size_t unions = a.size() + b.size() - common;
    return unions == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(unions);
}

ErrorReport evaluate_scene(const SceneGroundTruth& gt, std::span<const CellRecord> records,
                           const EvalOptions& options) {
    for (const CellRecord& rec : records) {
        if (rec.image_id != gt.image_id) {
            throw Error("evaluate_scene: record " + rec.cell_id + " belongs to image '" +
                        rec.image_id + "', ground truth is '" + gt.image_id + "'");
        }
    }

    ErrorReport report;
    report.options = options;
    report.gt_cells = gt.cells.size();
    report.predictions = records.size();

    // Greedy one-to-one matching by descending IoU.
    struct Pair {
        double iou;
        std::size_t gt_index;
        std::size_t pred_index;
    };
    std::vector<Pair> pairs;
    for (std::size_t g = 0; g < gt.cells.size(); ++g) {
        for (std::size_t p = 0; p < records.size(); ++p) {
            const double iou = mask_iou(gt.cells[g].mask, records[p].region.pixels);
            if (iou >= options.iou_match) pairs.push_back({iou, g, p});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        if (a.gt_index != b.gt_index) return a.gt_index < b.gt_index;
        return a.pred_index < b.pred_index;
    });

    std::vector<int> gt_match(gt.cells.size(), -1);
    std::vector<int> pred_match(records.size(), -1);
    for (const Pair& pair : pairs) {
        if (gt_match[pair.gt_index] >= 0 || pred_match[pair.pred_index] >= 0) continue;
        gt_match[pair.gt_index] = static_cast<int>(pair.pred_index);
        pred_match[pair.pred_index] = static_cast<int>(pair.gt_index);
        report.matched++;
    }

    for (std::size_t g = 0; g < gt.cells.size(); ++g) {
        if (gt_match[g] < 0) report.missed_cell++; // class 1
    }
    for (std::size_t p = 0; p < records.size(); ++p) {
        if (pred_match[p] < 0) report.not_a_cell++; // class 2
    }

    for (std::size_t g = 0; g < gt.cells.size(); ++g) {
        if (gt_match[g] < 0) continue;
        const SceneGroundTruth::Cell& gt_cell = gt.cells[g];
        const CellRecord& rec = records[static_cast<std::size_t>(gt_match[g])];

        if (mask_iou(gt_cell.mask, rec.region.pixels) < options.iou_boundary) {
            report.poor_cell_boundary++; // class 3
        }

        if (rec.internal_skipped) continue;
        report.internal_cells++;
        report.gt_internal_blobs += gt_cell.blob_masks.size();

        // class 4: ground-truth blob with no overlapping detected structure
        for (const std::vector<PixelCoord>& blob : gt_cell.blob_masks) {
            bool covered = false;
            for (const InternalStructure& s : rec.structures) {
                if (mask_intersection(blob, s.region.pixels) > 0) {
                    covered = true;
                    break;
                }
            }
            if (!covered) report.missed_internal++;
        }

        if (!rec.nucleus.has_nucleus()) {
            report.not_a_nucleus++; // nothing chosen counts as a wrong choice
            continue;
        }
        const Region& nucleus = rec.nucleus.nucleus().region;

        // class 5: identify the chosen nucleus by maximum overlap
        std::size_t best_overlap = mask_intersection(gt_cell.nucleus_mask, nucleus.pixels);
        bool nucleus_is_best = best_overlap > 0;
        for (const std::vector<PixelCoord>& blob : gt_cell.blob_masks) {
            const std::size_t overlap = mask_intersection(blob, nucleus.pixels);
            if (overlap > best_overlap) {
                best_overlap = overlap;
                nucleus_is_best = false;
            }
        }
        if (!nucleus_is_best) {
            report.not_a_nucleus++;
            continue;
        }

        // class 6: right nucleus, poor boundary
        if (mask_iou(gt_cell.nucleus_mask, nucleus.pixels) < options.iou_boundary) {
            report.poor_nucleus_boundary++;
        }
    }
    return report;
}

void accumulate(ErrorReport& total, const ErrorReport& scene) {
    total.missed_cell += scene.missed_cell;
    total.not_a_cell += scene.not_a_cell;
    total.poor_cell_boundary += scene.poor_cell_boundary;
    total.missed_internal += scene.missed_internal;
    total.not_a_nucleus += scene.not_a_nucleus;
    total.poor_nucleus_boundary += scene.poor_nucleus_boundary;
    total.gt_cells += scene.gt_cells;
    total.predictions += scene.predictions;
    total.matched += scene.matched;
    total.internal_cells += scene.internal_cells;
    total.gt_internal_blobs += scene.gt_internal_blobs;
    total.options = scene.options;
}

std::string format_percent(std::size_t count, std::size_t total) {
    const double pct =
        total == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(total);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", pct);
    return buf;
}

std::string report_table(const ErrorReport& r) {
    char buf[512];
    std::string out;
    out += "Segmentation error report\n";
    std::snprintf(buf, sizeof(buf),
                  "Cell detection errors for %zu cells | internal and nucleus errors for %zu "
                  "cells\n",
                  r.gt_cells, r.internal_cells);
    out += buf;
    std::snprintf(buf, sizeof(buf), "%10s %10s %10s %10s %10s %10s\n", "(1)", "(2)", "(3)", "(4)",
                  "(5)", "(6)");
    out += buf;
    std::snprintf(buf, sizeof(buf), "%10zu %10zu %10zu %10zu %10zu %10zu\n", r.missed_cell,
                  r.not_a_cell, r.poor_cell_boundary, r.missed_internal, r.not_a_nucleus,
                  r.poor_nucleus_boundary);
    out += buf;
    std::snprintf(buf, sizeof(buf), "%10s %10s %10s %10s %10s %10s\n",
                  format_percent(r.missed_cell, r.gt_cells).c_str(),
                  format_percent(r.not_a_cell, r.gt_cells).c_str(),
                  format_percent(r.poor_cell_boundary, r.gt_cells).c_str(),
                  format_percent(r.missed_internal, r.internal_cells).c_str(),
                  format_percent(r.not_a_nucleus, r.internal_cells).c_str(),
                  format_percent(r.poor_nucleus_boundary, r.internal_cells).c_str());
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "matching IoU >= %.2f, poor boundary IoU < %.2f; matched %zu of %zu "
                  "predictions\n",
                  r.options.iou_match, r.options.iou_boundary, r.matched, r.predictions);
    out += buf;
    return out;
}

std::string report_json(const ErrorReport& r) {
    json j;
    j["counts"] = {{"missed_cell", r.missed_cell},
                   {"not_a_cell", r.not_a_cell},
                   {"poor_cell_boundary", r.poor_cell_boundary},
                   {"missed_internal_structure", r.missed_internal},
                   {"not_a_nucleus", r.not_a_nucleus},
                   {"poor_nucleus_boundary", r.poor_nucleus_boundary}};
    j["rates"] = {{"missed_cell", r.missed_cell_rate()},
                  {"not_a_cell", r.not_a_cell_rate()},
                  {"poor_cell_boundary", r.poor_cell_boundary_rate()},
                  {"missed_internal_structure", r.missed_internal_rate()},
                  {"not_a_nucleus", r.not_a_nucleus_rate()},
                  {"poor_nucleus_boundary", r.poor_nucleus_boundary_rate()}};
    j["totals"] = {{"gt_cells", r.gt_cells},
                   {"predictions", r.predictions},
                   {"matched", r.matched},
                   {"internal_cells", r.internal_cells},
                   {"gt_internal_blobs", r.gt_internal_blobs}};
    j["options"] = {{"iou_match", r.options.iou_match}, {"iou_boundary", r.options.iou_boundary}};
    return j.dump(2) + "\n";
}

} // namespace qpmseg

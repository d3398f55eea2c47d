#pragma once

#include "qpmseg/phantom.hpp"
#include "qpmseg/pipeline.hpp"

#include <span>
#include <string>

namespace qpmseg {

struct EvalOptions {
    /// Minimum IoU for a prediction to match a ground-truth cell.
    double iou_match = 0.5;
    /// Matched objects below this IoU count as poor boundaries.
    double iou_boundary = 0.8;
};

/// The six error classes: (1) missed cell, (2) not-a-cell, (3) poor cell
/// boundary, (4) missed internal structure, (5) not-a-nucleus, (6) poor
/// nucleus boundary. Classes 1-3 are rated against ground-truth cells,
/// classes 4-6 against the cells whose internal detection actually ran.
struct ErrorReport {
    std::size_t missed_cell = 0;
    std::size_t not_a_cell = 0;
    std::size_t poor_cell_boundary = 0;
    std::size_t missed_internal = 0;
    std::size_t not_a_nucleus = 0;
    std::size_t poor_nucleus_boundary = 0;

    std::size_t gt_cells = 0;
    std::size_t predictions = 0;
    std::size_t matched = 0;
    std::size_t internal_cells = 0; ///< matched cells with internal detection run
    std::size_t gt_internal_blobs = 0;

    EvalOptions options;

    double rate(std::size_t count, std::size_t total) const {
        return total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total);
    }
    double missed_cell_rate() const { return rate(missed_cell, gt_cells); }
    double not_a_cell_rate() const { return rate(not_a_cell, gt_cells); }
    double poor_cell_boundary_rate() const { return rate(poor_cell_boundary, gt_cells); }
    double missed_internal_rate() const { return rate(missed_internal, internal_cells); }
    double not_a_nucleus_rate() const { return rate(not_a_nucleus, internal_cells); }
    double poor_nucleus_boundary_rate() const {
        return rate(poor_nucleus_boundary, internal_cells);
    }
};

/// IoU of two sorted pixel sets.
double mask_iou(std::span<const PixelCoord> a, std::span<const PixelCoord> b);

/// Scores one scene's pipeline records against its ground truth. Predictions
/// are matched to ground-truth cells greedily by descending IoU (one-to-one,
/// IoU >= iou_match). Throws Error when a record belongs to another image.
ErrorReport evaluate_scene(const SceneGroundTruth& gt, std::span<const CellRecord> records,
                           const EvalOptions& options = {});

/// Sums counts and denominators; options must agree.
void accumulate(ErrorReport& total, const ErrorReport& scene);

/// Two-row table (counts, percentages) over the six classes.
std::string report_table(const ErrorReport& report);

/// Report as a JSON document.
std::string report_json(const ErrorReport& report);

/// "1.85%"-style fixed two-decimal percentage.
std::string format_percent(std::size_t count, std::size_t total);

} // namespace qpmseg

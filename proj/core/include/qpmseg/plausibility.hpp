#pragma once

#include "qpmseg/config.hpp"
#include "qpmseg/image.hpp"
#include "qpmseg/segment.hpp"

#include <string>
#include <vector>

namespace qpmseg {

/// Sobel gradient magnitude of a whole image plus its mean, computed once
/// per image and shared by all candidate checks.
struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<float> magnitude;
    double mean = 0.0;

    float at(int x, int y) const { return magnitude[static_cast<std::size_t>(y) * width + x]; }
};

GradientField sobel_magnitude(const PhaseImage& img);

enum class RejectReason {
    TooSmall,         ///< area below pi * r_min^2
    Nested,           ///< lies inside another detected contour
    NoGradientSupport ///< no edge found under the contour in the gradient image
};

const char* to_string(RejectReason reason);

struct RejectedCandidate {
    Candidate candidate;
    RejectReason reason;
};

struct CheckOutcome {
    std::vector<Candidate> cells;
    std::vector<RejectedCandidate> rejects;
};

/// Area check: accept iff area >= pi * r_min^2 (inclusive).
bool check_min_area(const Region& region, const Config& cfg);

/// Removes every region whose bounding box is contained in another region's
/// bounding box and whose centroid falls inside that region's pixel set.
/// Containment is evaluated against all inputs, so nested chains collapse to
/// their outermost region. Survivors keep input order.
std::vector<Candidate> discard_nested(std::vector<Candidate> candidates);

/// Accepts a region when at least cfg.gradient_boundary_fraction of its
/// boundary pixels (dilated by one pixel) carry a gradient magnitude of at
/// least cfg.gradient_factor * mean(gradient). A gradient-free image rejects
/// everything; a zero fraction accepts everything.
bool gradient_check(const GradientField& grad, const Region& region, const Config& cfg);

/// The three checks in order: size, nesting, gradient. Each reject carries
/// the first reason that fired.
CheckOutcome run_checks(const PhaseImage& img, std::vector<Candidate> candidates,
                        const Config& cfg);

/// Variant reusing a precomputed gradient field (pipeline hot path).
CheckOutcome run_checks(const GradientField& grad, std::vector<Candidate> candidates,
                        const Config& cfg);

} // namespace qpmseg

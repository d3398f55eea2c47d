#include "qpmseg/plausibility.hpp"

#include <algorithm>
#include <cmath>

namespace qpmseg {

namespace {

constexpr double pi = 3.141592653589793238462643383279;

int clamp_coord(int v, int last) { return v < 0 ? 0 : (v > last ? last : v); }

} // namespace

GradientField sobel_magnitude(const PhaseImage& img) {
    GradientField g;
    g.width = img.width();
    g.height = img.height();
    g.magnitude.resize(img.pixel_count());

    const int w = g.width;
    const int h = g.height;
    double sum = 0.0;
    // Border pixels use replicated edges.
    for (int y = 0; y < h; ++y) {
        const int ym = clamp_coord(y - 1, h - 1);
        const int yp = clamp_coord(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
            const int xm = clamp_coord(x - 1, w - 1);
            const int xp = clamp_coord(x + 1, w - 1);
            const double tl = img.at(xm, ym), tc = img.at(x, ym), tr = img.at(xp, ym);
            const double ml = img.at(xm, y), mr = img.at(xp, y);
            const double bl = img.at(xm, yp), bc = img.at(x, yp), br = img.at(xp, yp);
            const double gx = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl);
            const double gy = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr);
            const double mag = std::sqrt(gx * gx + gy * gy);
            g.magnitude[static_cast<std::size_t>(y) * w + x] = static_cast<float>(mag);
            sum += mag;
        }
    }
    g.mean = sum / static_cast<double>(g.magnitude.size());
    return g;
}

const char* to_string(RejectReason reason) {
    switch (reason) {
    case RejectReason::TooSmall: return "too_small";
    case RejectReason::Nested: return "nested";
    case RejectReason::NoGradientSupport: return "no_gradient_support";
    }
    return "unknown";
}

bool check_min_area(const Region& region, const Config& cfg) {
    const double a_min = pi * cfg.r_min_um * cfg.r_min_um;
    return region.area_um2 >= a_min;
}

namespace {

// Nesting is evaluated against all inputs (not just survivors), so a chain
// A > B > C keeps only A.
std::vector<bool> nested_flags(const std::vector<Candidate>& candidates) {
    const std::size_t n = candidates.size();
    std::vector<bool> nested(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const Region& inner = candidates[i].region;
        const double s = inner.pixel_size_um;
        const PixelCoord centroid_px{
            static_cast<int>(std::lround(inner.centroid_um.x / s)),
            static_cast<int>(std::lround(inner.centroid_um.y / s))};
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const Region& outer = candidates[j].region;
            if (!outer.bbox.contains(inner.bbox)) continue;
            if (outer.contains(centroid_px)) {
                nested[i] = true;
                break;
            }
        }
    }
    return nested;
}

} // namespace

std::vector<Candidate> discard_nested(std::vector<Candidate> candidates) {
    const std::vector<bool> nested = nested_flags(candidates);
    std::vector<Candidate> out;
    out.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!nested[i]) out.push_back(std::move(candidates[i]));
    }
    return out;
}

bool gradient_check(const GradientField& grad, const Region& region, const Config& cfg) {
    if (cfg.gradient_boundary_fraction == 0.0) return true;
    if (grad.mean == 0.0) return false; // flat image: nothing has edges

    const double t_g = cfg.gradient_factor * grad.mean;
    // Test set: boundary pixels dilated by one pixel, deduplicated.
    std::vector<PixelCoord> test_set;
    test_set.reserve(region.boundary.size() * 9);
    for (const PixelCoord& p : region.boundary) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const PixelCoord q{p.x + dx, p.y + dy};
                if (q.x < 0 || q.y < 0 || q.x >= grad.width || q.y >= grad.height) continue;
                test_set.push_back(q);
            }
        }
    }
    std::sort(test_set.begin(), test_set.end());
    test_set.erase(std::unique(test_set.begin(), test_set.end()), test_set.end());
    if (test_set.empty()) return false;

    std::size_t hits = 0;
    for (const PixelCoord& q : test_set) {
        if (grad.at(q.x, q.y) >= t_g) ++hits;
    }
    const double fraction = static_cast<double>(hits) / static_cast<double>(test_set.size());
    return fraction >= cfg.gradient_boundary_fraction;
}

CheckOutcome run_checks(const PhaseImage& img, std::vector<Candidate> candidates,
                        const Config& cfg) {
    const GradientField grad = sobel_magnitude(img);
    return run_checks(grad, std::move(candidates), cfg);
}

CheckOutcome run_checks(const GradientField& grad, std::vector<Candidate> candidates,
                        const Config& cfg) {
    CheckOutcome out;

    // 1. size
    std::vector<Candidate> sized;
    for (auto& c : candidates) {
        if (check_min_area(c.region, cfg)) {
            sized.push_back(std::move(c));
        } else {
            out.rejects.push_back({std::move(c), RejectReason::TooSmall});
        }
    }

    // 2. nesting
    const std::vector<bool> nested = nested_flags(sized);
    std::vector<Candidate> survivors;
    survivors.reserve(sized.size());
    for (std::size_t i = 0; i < sized.size(); ++i) {
        if (nested[i]) {
            out.rejects.push_back({std::move(sized[i]), RejectReason::Nested});
        } else {
            survivors.push_back(std::move(sized[i]));
        }
    }

    // 3. gradient (most expensive, so last)
    for (auto& c : survivors) {
        if (gradient_check(grad, c.region, cfg)) {
            out.cells.push_back(std::move(c));
        } else {
            out.rejects.push_back({std::move(c), RejectReason::NoGradientSupport});
        }
    }
    return out;
}

} // namespace qpmseg

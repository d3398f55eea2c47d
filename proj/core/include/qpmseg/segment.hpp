#pragma once

#include "qpmseg/config.hpp"
#include "qpmseg/image.hpp"
#include "qpmseg/region.hpp"

#include <cstdint>
#include <vector>

namespace qpmseg {

/// Per-pixel foreground mask, row-major, same dimensions as the source image.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    bool at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x] != 0; }
};

/// A candidate region from coarse detection. Candidates touching the image
/// border are kept but flagged; their geometry is clipped and downstream
/// features are unreliable.
struct Candidate {
    Region region;
    bool border = false;
};

/// Foreground iff phase >= threshold (inclusive).
BinaryMask binarize(const PhaseImage& img, double threshold);

/// Maximal 8-connected foreground components, ordered by their
/// topmost-then-leftmost pixel. Each component's pixels come sorted row-major.
std::vector<std::vector<PixelCoord>> connected_components(const BinaryMask& mask);

/// binarize + connected_components + region construction in one step.
std::vector<Candidate> detect_candidates(const PhaseImage& img, double threshold,
                                         const Config& cfg);

} // namespace qpmseg

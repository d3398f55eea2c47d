#include "qpmseg/segment.hpp"

#include <algorithm>

namespace qpmseg {

BinaryMask binarize(const PhaseImage& img, double threshold) {
    BinaryMask mask;
    mask.width = img.width();
    mask.height = img.height();
    mask.data.resize(img.pixel_count());
    const std::vector<float>& phase = img.samples();
    const auto t = static_cast<float>(threshold);
    for (std::size_t i = 0; i < phase.size(); ++i) {
        mask.data[i] = phase[i] >= t ? 1 : 0;
    }
    return mask;
}

std::vector<std::vector<PixelCoord>> connected_components(const BinaryMask& mask) {
    const int w = mask.width;
    const int h = mask.height;
    std::vector<std::uint8_t> visited(mask.data.size(), 0);
    std::vector<std::vector<PixelCoord>> components;
    std::vector<PixelCoord> stack;

    // Row-major scan: components are discovered (and therefore ordered) by
    // their topmost-then-leftmost pixel.
    for (int y = 0; y < h; ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = row + x;
            if (mask.data[idx] == 0 || visited[idx]) continue;

            std::vector<PixelCoord> comp;
            visited[idx] = 1;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const PixelCoord p = stack.back();
                stack.pop_back();
                comp.push_back(p);
                for (int dy = -1; dy <= 1; ++dy) {
                    const int ny = p.y + dy;
                    if (ny < 0 || ny >= h) continue;
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int nx = p.x + dx;
                        if (nx < 0 || nx >= w) continue;
                        const std::size_t n = static_cast<std::size_t>(ny) * w + nx;
                        if (mask.data[n] == 0 || visited[n]) continue;
                        visited[n] = 1;
                        stack.push_back({nx, ny});
                    }
                }
            }
            std::sort(comp.begin(), comp.end());
            components.push_back(std::move(comp));
        }
    }
    return components;
}

std::vector<Candidate> detect_candidates(const PhaseImage& img, double threshold,
                                         const Config& cfg) {
    (void)cfg; // connectivity is fixed at 8
    const BinaryMask mask = binarize(img, threshold);
    std::vector<std::vector<PixelCoord>> components = connected_components(mask);

    std::vector<Candidate> candidates;
    candidates.reserve(components.size());
    const int x_last = img.width() - 1;
    const int y_last = img.height() - 1;
    for (auto& comp : components) {
        bool border = false;
        for (const PixelCoord& p : comp) {
            if (p.x == 0 || p.y == 0 || p.x == x_last || p.y == y_last) {
                border = true;
                break;
            }
        }
        Candidate c{region_from_pixels(std::move(comp), img.pixel_size_um()), border};
        candidates.push_back(std::move(c));
    }
    return candidates;
}

} // namespace qpmseg

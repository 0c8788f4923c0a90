#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace tubekit {

// Axis-aligned rectangle in pixel coordinates, [x1, x2) x [y1, y2).
// Real-valued extents; a box is valid only with strictly positive area.
struct Box {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    bool valid() const noexcept {
        return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
               std::isfinite(y2) && x1 < x2 && y1 < y2;
    }

    double area() const noexcept { return (x2 - x1) * (y2 - y1); }

    Box translated(double dx, double dy) const noexcept {
        return Box{x1 + dx, y1 + dy, x2 + dx, y2 + dy};
    }

    bool operator==(const Box&) const = default;
};

// One box on one frame of a track or tube.
struct FrameBox {
    int frame = 0;
    Box box;

    bool operator==(const FrameBox&) const = default;
};

// Intersection area over union area. Symmetric, in [0, 1], exactly 1 for
// identical boxes and exactly 0 for boxes whose overlap has zero area.
// Throws InvalidInputError for degenerate boxes.
double iou(const Box& a, const Box& b);

// Mean per-frame IoU over the union of frame indices covered by either
// track; a frame covered by only one side contributes 0. Each side may
// hold at most one box per frame. Throws InvalidInputError when both
// tracks are empty.
double mean_frame_iou(std::span<const FrameBox> a, std::span<const FrameBox> b);

}  // namespace tubekit

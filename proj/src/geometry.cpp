#include "tubekit/geometry.hpp"

#include <algorithm>
#include <map>

#include "tubekit/error.hpp"

namespace tubekit {

namespace {

void require_valid(const Box& b, const char* which) {
    if (!b.valid()) {
        throw InvalidInputError(std::string("degenerate box (") + which + "): extents must be finite with x1 < x2 and y1 < y2");
    }
}

// Frame -> box lookup that rejects duplicate frames on one side.
std::map<int, Box> index_track(std::span<const FrameBox> track, const char* which) {
    std::map<int, Box> by_frame;
    for (const FrameBox& fb : track) {
        if (!by_frame.emplace(fb.frame, fb.box).second) {
            throw InvalidInputError(std::string("track (") + which + ") has more than one box on frame " + std::to_string(fb.frame));
        }
    }
    return by_frame;
}

}  // namespace

double iou(const Box& a, const Box& b) {
    require_valid(a, "first");
    require_valid(b, "second");

    const double ix1 = std::max(a.x1, b.x1);
    const double iy1 = std::max(a.y1, b.y1);
    const double ix2 = std::min(a.x2, b.x2);
    const double iy2 = std::min(a.y2, b.y2);

    const double iw = ix2 - ix1;
    const double ih = iy2 - iy1;
    if (iw <= 0.0 || ih <= 0.0) return 0.0;

    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return inter / uni;
}

double mean_frame_iou(std::span<const FrameBox> a, std::span<const FrameBox> b) {
    if (a.empty() && b.empty()) {
        throw InvalidInputError("mean_frame_iou: both tracks are empty");
    }

    const auto boxes_a = index_track(a, "first");
    const auto boxes_b = index_track(b, "second");

    // Union of covered frames; a one-sided frame contributes 0 to the sum
    // but still counts in the denominator.
    double sum = 0.0;
    std::size_t frames = 0;
    auto it_a = boxes_a.begin();
    auto it_b = boxes_b.begin();
    while (it_a != boxes_a.end() || it_b != boxes_b.end()) {
        ++frames;
        if (it_a != boxes_a.end() && (it_b == boxes_b.end() || it_a->first < it_b->first)) {
            ++it_a;
        } else if (it_b != boxes_b.end() && (it_a == boxes_a.end() || it_b->first < it_a->first)) {
            ++it_b;
        } else {
            sum += iou(it_a->second, it_b->second);
            ++it_a;
            ++it_b;
        }
    }
    return sum / static_cast<double>(frames);
}

}  // namespace tubekit

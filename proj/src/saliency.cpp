#include "tubekit/saliency.hpp"

#include <algorithm>
#include <cmath>

#include "tubekit/error.hpp"

namespace tubekit {

FlowMagnitudeMap::FlowMagnitudeMap(int width, int height, std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)), max_value_(0.0f) {
    if (width_ <= 0 || height_ <= 0) {
        throw InvalidInputError("flow map dimensions must be positive");
    }
    if (values_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
        throw InvalidInputError("flow map value count does not match width*height");
    }
    for (const float v : values_) {
        if (!std::isfinite(v) || v < 0.0f) {
            throw InvalidInputError("flow map values must be finite and non-negative");
        }
        max_value_ = std::max(max_value_, v);
    }
}

FlowMagnitudeMap normalize(const FlowMagnitudeMap& map) {
    const float max = map.max_value();
    std::vector<float> out(map.values().begin(), map.values().end());
    if (max > 0.0f) {
        for (float& v : out) v /= max;
    }
    return FlowMagnitudeMap(map.width(), map.height(), std::move(out));
}

double region_motion_score(const FlowMagnitudeMap& normalized, const Box& region) {
    if (!region.valid()) {
        throw InvalidInputError("region_motion_score: degenerate region");
    }
    const int w = normalized.width();
    const int h = normalized.height();

    // A pixel (x, y) belongs to the region when its center (x+0.5, y+0.5)
    // lies inside the clipped box.
    const double cx1 = std::max(region.x1, 0.0);
    const double cy1 = std::max(region.y1, 0.0);
    const double cx2 = std::min(region.x2, static_cast<double>(w));
    const double cy2 = std::min(region.y2, static_cast<double>(h));
    if (cx1 >= cx2 || cy1 >= cy2) {
        throw InvalidInputError("region_motion_score: region lies outside the map");
    }

    const int x_lo = std::max(0, static_cast<int>(std::ceil(cx1 - 0.5)));
    const int x_hi = std::min(w, static_cast<int>(std::ceil(cx2 - 0.5)));
    const int y_lo = std::max(0, static_cast<int>(std::ceil(cy1 - 0.5)));
    const int y_hi = std::min(h, static_cast<int>(std::ceil(cy2 - 0.5)));
    if (x_lo >= x_hi || y_lo >= y_hi) {
        throw InvalidInputError("region_motion_score: region contains no pixel centers");
    }

    double sum = 0.0;
    for (int y = y_lo; y < y_hi; ++y) {
        for (int x = x_lo; x < x_hi; ++x) {
            sum += normalized.at(x, y);
        }
    }
    const double count = static_cast<double>(x_hi - x_lo) * static_cast<double>(y_hi - y_lo);
    return sum / count;
}

std::pair<std::vector<RegionProposal>, SaliencyReport> filter_regions(
    std::span<const RegionProposal> proposals, const FlowMagnitudeMap& map, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw InvalidInputError("filter_regions: alpha must lie in [0, 1]");
    }
    for (const RegionProposal& p : proposals) {
        if (p.video_id != proposals.front().video_id || p.frame != proposals.front().frame) {
            throw InvalidInputError("filter_regions: proposals must reference a single (video, frame)");
        }
    }

    const FlowMagnitudeMap normalized = normalize(map);

    SaliencyReport report;
    report.total_count = proposals.size();
    report.alpha = alpha;

    std::vector<RegionProposal> retained;
    for (const RegionProposal& p : proposals) {
        // Discard below alpha; a score exactly at the threshold is kept.
        if (region_motion_score(normalized, p.box) >= alpha) {
            retained.push_back(p);
        }
    }
    report.retained_count = retained.size();
    report.discard_fraction =
        report.total_count > 0
            ? 1.0 - static_cast<double>(report.retained_count) / static_cast<double>(report.total_count)
            : 0.0;
    return {std::move(retained), report};
}

}  // namespace tubekit

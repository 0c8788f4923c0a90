#pragma once

#include <span>
#include <utility>
#include <vector>

#include "tubekit/geometry.hpp"
#include "tubekit/records.hpp"

namespace tubekit {

// Dense per-frame grid of optical-flow magnitudes, row-major with the
// origin at the top-left pixel. Values are non-negative and finite.
class FlowMagnitudeMap {
public:
    FlowMagnitudeMap(int width, int height, std::vector<float> values);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    float at(int x, int y) const noexcept { return values_[static_cast<std::size_t>(y) * width_ + x]; }
    std::span<const float> values() const noexcept { return values_; }
    float max_value() const noexcept { return max_value_; }

    bool operator==(const FlowMagnitudeMap&) const = default;

private:
    int width_;
    int height_;
    std::vector<float> values_;
    float max_value_;
};

struct SaliencyReport {
    std::size_t total_count = 0;
    std::size_t retained_count = 0;
    double discard_fraction = 0.0;
    double alpha = 0.0;
};

// Divides every value by the map maximum, producing values in [0, 1].
// An all-zero map stays all zero.
FlowMagnitudeMap normalize(const FlowMagnitudeMap& map);

// Mean value over the pixels whose centers lie inside the region, after
// clipping the region to the map. Expects a normalized map; throws
// InvalidInputError when no pixel center falls inside the clipped region.
double region_motion_score(const FlowMagnitudeMap& normalized, const Box& region);

// Keeps the proposals whose motion score meets the threshold, preserving
// input order. Normalizes the map internally. All proposals must belong to
// one (video, frame) and alpha must lie in [0, 1].
std::pair<std::vector<RegionProposal>, SaliencyReport> filter_regions(
    std::span<const RegionProposal> proposals, const FlowMagnitudeMap& map, double alpha);

}  // namespace tubekit

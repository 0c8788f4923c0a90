#pragma once

#include <span>
#include <string>
#include <vector>

#include "tubekit/geometry.hpp"

namespace tubekit {

// A candidate region of one frame together with its per-action confidence
// (weights . phi + bias for the action being linked).
struct ScoredRegion {
    int region_id = 0;
    int frame = 0;
    Box box;
    double unary = 0.0;
};

// One region per frame across a whole video, frames consecutive 0..T-1,
// plus the action label and the normalized path score.
struct ActionTube {
    std::string video_id;
    std::string action;
    std::vector<FrameBox> regions;
    double score = 0.0;

    bool operator==(const ActionTube&) const = default;
};

struct LinkConfig {
    double lambda = 1.0;  // weight of the overlap term in the link score
    int max_tubes = 3;    // per (video, action) extraction cap

    void validate() const;
};

// Link score between regions of consecutive frames: the sum of both unary
// confidences plus lambda times the boxes' IoU. Two regions link strongly
// when both score high and their spatial extents overlap.
double link_score(const ScoredRegion& current, const ScoredRegion& next, double lambda);

struct PathResult {
    std::vector<std::size_t> choices;  // index into each frame's region list
    double score = 0.0;                // (1/T) * sum of the T-1 link scores
};

// Maximizes the summed link scores over all per-frame region choices via
// forward dynamic programming with backpointers. The reported score divides
// by T (the frame count) even though T-1 links contribute. Ties at any
// argmax resolve toward the lower region_id. A single-frame video reduces
// to picking the region with the highest unary, whose score it reports.
// Throws NoFeasiblePathError when some frame has no regions.
PathResult best_path(std::span<const std::vector<ScoredRegion>> frames, double lambda);

// Repeatedly extracts the best path, removing its regions after each round,
// until a frame runs out of regions or max_tubes tubes exist. Scores are
// non-increasing in extraction order.
std::vector<ActionTube> extract_tubes(const std::string& video_id, const std::string& action,
                                      std::vector<std::vector<ScoredRegion>> frames,
                                      const LinkConfig& config);

// Label of the highest-scoring tube across all actions of one video; ties
// break toward the earlier vocabulary entry.
std::string classify_video(std::span<const ActionTube> tubes,
                           std::span<const std::string> vocabulary);

}  // namespace tubekit

#pragma once

#include <string>
#include <vector>

#include "tubekit/geometry.hpp"

namespace tubekit {

// A candidate box on one frame of one video. region_id is unique within
// its (video, frame).
struct RegionProposal {
    std::string video_id;
    int frame = 0;
    int region_id = 0;
    Box box;

    bool operator==(const RegionProposal&) const = default;
};

// Appearance and motion feature vectors for one proposal. Dimensions are
// constant across a corpus; the fused representation is phi_s followed by
// phi_m.
struct FeatureRecord {
    std::string video_id;
    int frame = 0;
    int region_id = 0;
    std::vector<double> phi_s;
    std::vector<double> phi_m;

    bool operator==(const FeatureRecord&) const = default;
};

// Annotated actor track: one action label, at most one box per frame.
struct GroundTruthTrack {
    std::string video_id;
    int track_id = 0;
    std::string action;
    std::vector<FrameBox> boxes;

    bool operator==(const GroundTruthTrack&) const = default;
};

}  // namespace tubekit

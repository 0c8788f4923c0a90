#pragma once

#include <cstdint>
#include <filesystem>

#include "tubekit/corpus.hpp"

namespace tubekit {

// Knobs for the synthetic corpus. Each video carries one actor moving
// linearly through a flow field that is hot inside the actor box and near
// zero elsewhere; proposals are the ground-truth box, jittered copies of
// it, and static background distractors; features are drawn from isotropic
// unit-variance Gaussians whose means are class_separation apart.
struct SynthConfig {
    int num_videos = 8;
    int frames_per_video = 12;
    int num_actions = 2;
    int proposals_per_frame = 10;
    int feature_dim_s = 8;
    int feature_dim_m = 8;
    double class_separation = 8.0;
    double actor_flow = 1.0;
    double background_flow = 0.05;
    double jitter = 1.0;  // scales the box perturbation of jittered copies
    int map_width = 64;
    int map_height = 48;
    std::uint64_t seed = 0;

    void validate() const;
};

// Builds the corpus in memory. Deterministic: one seed, one byte stream.
Corpus generate(const SynthConfig& config);

// Builds the corpus and writes it under root in the corpus-io layout.
Corpus generate(const SynthConfig& config, const std::filesystem::path& root);

}  // namespace tubekit

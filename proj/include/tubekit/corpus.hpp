#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tubekit/geometry.hpp"
#include "tubekit/linker.hpp"
#include "tubekit/model.hpp"
#include "tubekit/records.hpp"
#include "tubekit/saliency.hpp"

namespace tubekit {

// Everything known about one video, indexed by frame (dense 0..T-1).
struct VideoEntry {
    int frame_count = 0;
    std::vector<std::vector<RegionProposal>> proposals;  // per frame, sorted by region_id
    std::vector<std::vector<FeatureRecord>> features;    // per frame, sorted by region_id
    std::vector<std::optional<FlowMagnitudeMap>> flow;   // per frame, when present on disk

    bool operator==(const VideoEntry&) const = default;
};

// An in-memory corpus. Loading validates every cross-reference; the loaded
// value is immutable by convention and safe to share across threads.
struct Corpus {
    std::vector<std::string> actions;           // vocabulary; index order is fixed
    std::map<std::string, VideoEntry> videos;   // keyed by video_id
    std::vector<GroundTruthTrack> tracks;       // sorted by (video_id, track_id)
    int feature_dim_s = 0;                      // 0 until the first feature record
    int feature_dim_m = 0;

    const FeatureRecord* find_feature(const std::string& video_id, int frame, int region_id) const;
    std::vector<const GroundTruthTrack*> tracks_of(const std::string& video_id) const;
    bool has_action(const std::string& action) const;

    bool operator==(const Corpus&) const = default;
};

// One row of a per-region score table: one score per vocabulary action.
struct ScoreRow {
    std::string video_id;
    int frame = 0;
    int region_id = 0;
    std::vector<double> scores;

    bool operator==(const ScoreRow&) const = default;
};

// Directory layout under a corpus root:
//   actions.txt      one label per line; line order defines the vocabulary
//   proposals.tsv    video_id  frame  region_id  x1  y1  x2  y2
//   features.tsv     video_id  frame  region_id  Ds  Dm  <Ds reals>  <Dm reals>
//   groundtruth.tsv  video_id  track_id  action  frame  x1  y1  x2  y2
//   flow/<video>/<frame>.flm   binary flow-magnitude grid (see read_flow_map)
// All text files are UTF-8, tab-separated, one record per line, reals in
// shortest round-trip form. Rewriting a loaded corpus reproduces the bytes.
Corpus load_corpus(const std::filesystem::path& root);
void write_corpus(const Corpus& corpus, const std::filesystem::path& root);

// "FLM1" magic, then width and height as 32-bit little-endian unsigned
// integers, then width*height IEEE-754 32-bit little-endian values,
// row-major from the top-left pixel.
FlowMagnitudeMap read_flow_map(const std::filesystem::path& file);
void write_flow_map(const FlowMagnitudeMap& map, const std::filesystem::path& file);

// proposals.tsv format, reusable for filtered subsets.
std::vector<RegionProposal> read_proposals(const std::filesystem::path& file);
void write_proposals(std::span<const RegionProposal> proposals, const std::filesystem::path& file);

// models.tsv: action  dim  bias  <dim reals>, one line per action.
std::vector<ActionModel> read_models(const std::filesystem::path& file);
void write_models(std::span<const ActionModel> models, const std::filesystem::path& file);

// tubes.tsv: video_id  action  score  T  then T (frame, x1, y1, x2, y2)
// groups. Frames must run 0..T-1.
std::vector<ActionTube> read_tubes(const std::filesystem::path& file);
void write_tubes(std::span<const ActionTube> tubes, const std::filesystem::path& file);

// scores.tsv: video_id  frame  region_id  <one real per vocabulary action>.
std::vector<ScoreRow> read_scores(const std::filesystem::path& file);
void write_scores(std::span<const ScoreRow> rows, const std::filesystem::path& file);

// Writes content to file atomically (temp file in the same directory, then
// rename), creating parent directories as needed.
void write_file_atomic(const std::filesystem::path& file, const std::string& content);

}  // namespace tubekit

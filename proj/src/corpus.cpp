#include "tubekit/corpus.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "tubekit/error.hpp"
#include "tubekit/text.hpp"

namespace tubekit {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> read_lines(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw IoError(file.string() + ": cannot open file");
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        lines.push_back(line);
    }
    return lines;
}

std::string read_bytes(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw IoError(file.string() + ": cannot open file");
    }
    std::ostringstream out;
    out << in.rdbuf();
    return std::move(out).str();
}

[[noreturn]] void fail(const fs::path& file, std::size_t line, const std::string& reason) {
    throw ParseError(file.string(), line, reason);
}

double field_real(const fs::path& file, std::size_t line, std::string_view token, const char* what) {
    double v = 0.0;
    if (!parse_real(token, v)) {
        fail(file, line, std::string("expected a finite real for ") + what + ", got '" + std::string(token) + "'");
    }
    return v;
}

int field_index(const fs::path& file, std::size_t line, std::string_view token, const char* what) {
    std::int64_t v = 0;
    if (!parse_int(token, v) || v < 0 || v > std::numeric_limits<int>::max()) {
        fail(file, line, std::string("expected a non-negative integer for ") + what + ", got '" + std::string(token) + "'");
    }
    return static_cast<int>(v);
}

Box field_box(const fs::path& file, std::size_t line, std::span<const std::string_view> coords) {
    Box box{field_real(file, line, coords[0], "x1"), field_real(file, line, coords[1], "y1"),
            field_real(file, line, coords[2], "x2"), field_real(file, line, coords[3], "y2")};
    if (!box.valid()) {
        fail(file, line, "degenerate box: requires x1 < x2 and y1 < y2");
    }
    return box;
}

void append_box(std::string& out, const Box& box) {
    out += format_real(box.x1);
    out += '\t';
    out += format_real(box.y1);
    out += '\t';
    out += format_real(box.x2);
    out += '\t';
    out += format_real(box.y2);
}

std::uint32_t load_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void store_u32le(std::string& out, std::uint32_t v) {
    out += static_cast<char>(v & 0xff);
    out += static_cast<char>((v >> 8) & 0xff);
    out += static_cast<char>((v >> 16) & 0xff);
    out += static_cast<char>((v >> 24) & 0xff);
}

}  // namespace

const FeatureRecord* Corpus::find_feature(const std::string& video_id, int frame, int region_id) const {
    const auto video = videos.find(video_id);
    if (video == videos.end()) return nullptr;
    if (frame < 0 || frame >= video->second.frame_count) return nullptr;
    const auto& records = video->second.features[static_cast<std::size_t>(frame)];
    const auto it = std::lower_bound(records.begin(), records.end(), region_id,
                                     [](const FeatureRecord& r, int id) { return r.region_id < id; });
    if (it == records.end() || it->region_id != region_id) return nullptr;
    return &*it;
}

std::vector<const GroundTruthTrack*> Corpus::tracks_of(const std::string& video_id) const {
    std::vector<const GroundTruthTrack*> result;
    for (const GroundTruthTrack& t : tracks) {
        if (t.video_id == video_id) result.push_back(&t);
    }
    return result;
}

bool Corpus::has_action(const std::string& action) const {
    return std::find(actions.begin(), actions.end(), action) != actions.end();
}

FlowMagnitudeMap read_flow_map(const fs::path& file) {
    const std::string bytes = read_bytes(file);
    if (bytes.size() < 12 || bytes.compare(0, 4, "FLM1") != 0) {
        fail(file, 0, "not a flow magnitude file (missing FLM1 header)");
    }
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint32_t width = load_u32le(p + 4);
    const std::uint32_t height = load_u32le(p + 8);
    if (width == 0 || height == 0) {
        fail(file, 0, "flow map dimensions must be positive");
    }
    const std::uint64_t count = static_cast<std::uint64_t>(width) * height;
    const std::uint64_t expected = 12 + 4 * count;
    if (bytes.size() != expected) {
        fail(file, 0, "flow map payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                          std::to_string(expected));
    }
    std::vector<float> values(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const float v = std::bit_cast<float>(load_u32le(p + 12 + 4 * i));
        if (!std::isfinite(v) || v < 0.0f) {
            fail(file, 0, "flow magnitudes must be finite and non-negative");
        }
        values[i] = v;
    }
    return FlowMagnitudeMap(static_cast<int>(width), static_cast<int>(height), std::move(values));
}

void write_flow_map(const FlowMagnitudeMap& map, const fs::path& file) {
    std::string out;
    out.reserve(12 + 4 * map.values().size());
    out += "FLM1";
    store_u32le(out, static_cast<std::uint32_t>(map.width()));
    store_u32le(out, static_cast<std::uint32_t>(map.height()));
    for (const float v : map.values()) {
        store_u32le(out, std::bit_cast<std::uint32_t>(v));
    }
    write_file_atomic(file, out);
}

std::vector<RegionProposal> read_proposals(const fs::path& file) {
    const auto lines = read_lines(file);
    std::vector<RegionProposal> proposals;
    proposals.reserve(lines.size());
    std::set<std::tuple<std::string, int, int>> seen;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        const auto fields = split_tabs(lines[i]);
        if (fields.size() != 7) {
            fail(file, lineno, "expected 7 tab-separated fields, got " + std::to_string(fields.size()));
        }
        RegionProposal p;
        p.video_id = std::string(fields[0]);
        if (p.video_id.empty()) fail(file, lineno, "empty video_id");
        p.frame = field_index(file, lineno, fields[1], "frame");
        p.region_id = field_index(file, lineno, fields[2], "region_id");
        p.box = field_box(file, lineno, std::span(fields).subspan(3));
        if (!seen.insert({p.video_id, p.frame, p.region_id}).second) {
            fail(file, lineno, "duplicate region_id " + std::to_string(p.region_id) + " in video '" +
                                   p.video_id + "' frame " + std::to_string(p.frame));
        }
        proposals.push_back(std::move(p));
    }
    return proposals;
}

void write_proposals(std::span<const RegionProposal> proposals, const fs::path& file) {
    std::string out;
    for (const RegionProposal& p : proposals) {
        out += p.video_id;
        out += '\t';
        out += std::to_string(p.frame);
        out += '\t';
        out += std::to_string(p.region_id);
        out += '\t';
        append_box(out, p.box);
        out += '\n';
    }
    write_file_atomic(file, out);
}

std::vector<ActionModel> read_models(const fs::path& file) {
    const auto lines = read_lines(file);
    std::vector<ActionModel> models;
    std::set<std::string> seen;
    std::size_t dim = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        const auto fields = split_tabs(lines[i]);
        if (fields.size() < 4) {
            fail(file, lineno, "expected at least 4 tab-separated fields");
        }
        ActionModel m;
        m.action = std::string(fields[0]);
        if (m.action.empty()) fail(file, lineno, "empty action label");
        const int declared = field_index(file, lineno, fields[1], "dim");
        if (declared < 1) fail(file, lineno, "model dimension must be positive");
        if (fields.size() != static_cast<std::size_t>(declared) + 3) {
            fail(file, lineno, "declared dimension " + std::to_string(declared) + " but found " +
                                   std::to_string(fields.size() - 3) + " weights");
        }
        m.bias = field_real(file, lineno, fields[2], "bias");
        m.weights.resize(static_cast<std::size_t>(declared));
        for (int d = 0; d < declared; ++d) {
            m.weights[static_cast<std::size_t>(d)] =
                field_real(file, lineno, fields[static_cast<std::size_t>(d) + 3], "weight");
        }
        if (!seen.insert(m.action).second) {
            fail(file, lineno, "duplicate model for action '" + m.action + "'");
        }
        if (dim == 0) {
            dim = m.weights.size();
        } else if (m.weights.size() != dim) {
            fail(file, lineno, "model dimension differs from previous models");
        }
        models.push_back(std::move(m));
    }
    return models;
}

void write_models(std::span<const ActionModel> models, const fs::path& file) {
    std::string out;
    for (const ActionModel& m : models) {
        out += m.action;
        out += '\t';
        out += std::to_string(m.weights.size());
        out += '\t';
        out += format_real(m.bias);
        for (const double w : m.weights) {
            out += '\t';
            out += format_real(w);
        }
        out += '\n';
    }
    write_file_atomic(file, out);
}

std::vector<ActionTube> read_tubes(const fs::path& file) {
    const auto lines = read_lines(file);
    std::vector<ActionTube> tubes;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        const auto fields = split_tabs(lines[i]);
        if (fields.size() < 4) {
            fail(file, lineno, "expected at least 4 tab-separated fields");
        }
        ActionTube tube;
        tube.video_id = std::string(fields[0]);
        if (tube.video_id.empty()) fail(file, lineno, "empty video_id");
        tube.action = std::string(fields[1]);
        if (tube.action.empty()) fail(file, lineno, "empty action label");
        tube.score = field_real(file, lineno, fields[2], "score");
        const int frame_count = field_index(file, lineno, fields[3], "frame count");
        if (frame_count < 1) fail(file, lineno, "tube frame count must be positive");
        if (fields.size() != 4 + 5 * static_cast<std::size_t>(frame_count)) {
            fail(file, lineno, "tube declares " + std::to_string(frame_count) + " frames but carries " +
                                   std::to_string((fields.size() - 4) / 5) + " region groups");
        }
        tube.regions.reserve(static_cast<std::size_t>(frame_count));
        for (int t = 0; t < frame_count; ++t) {
            const std::size_t base = 4 + 5 * static_cast<std::size_t>(t);
            const int frame = field_index(file, lineno, fields[base], "frame index");
            if (frame != t) {
                fail(file, lineno, "tube frames must run 0..T-1 consecutively");
            }
            tube.regions.push_back({frame, field_box(file, lineno, std::span(fields).subspan(base + 1, 4))});
        }
        tubes.push_back(std::move(tube));
    }
    return tubes;
}

void write_tubes(std::span<const ActionTube> tubes, const fs::path& file) {
    std::string out;
    for (const ActionTube& tube : tubes) {
        if (tube.regions.empty() || !std::isfinite(tube.score)) {
            throw InvalidInputError("write_tubes: tube must have regions and a finite score");
        }
        out += tube.video_id;
        out += '\t';
        out += tube.action;
        out += '\t';
        out += format_real(tube.score);
        out += '\t';
        out += std::to_string(tube.regions.size());
        for (std::size_t t = 0; t < tube.regions.size(); ++t) {
            if (tube.regions[t].frame != static_cast<int>(t) || !tube.regions[t].box.valid()) {
                throw InvalidInputError("write_tubes: tube regions must be valid boxes on frames 0..T-1");
            }
            out += '\t';
            out += std::to_string(tube.regions[t].frame);
            out += '\t';
            append_box(out, tube.regions[t].box);
        }
        out += '\n';
    }
    write_file_atomic(file, out);
}

std::vector<ScoreRow> read_scores(const fs::path& file) {
    const auto lines = read_lines(file);
    std::vector<ScoreRow> rows;
    std::size_t score_count = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        const auto fields = split_tabs(lines[i]);
        if (fields.size() < 4) {
            fail(file, lineno, "expected at least 4 tab-separated fields");
        }
        ScoreRow row;
        row.video_id = std::string(fields[0]);
        if (row.video_id.empty()) fail(file, lineno, "empty video_id");
        row.frame = field_index(file, lineno, fields[1], "frame");
        row.region_id = field_index(file, lineno, fields[2], "region_id");
        for (std::size_t f = 3; f < fields.size(); ++f) {
            row.scores.push_back(field_real(file, lineno, fields[f], "score"));
        }
        if (score_count == 0) {
            score_count = row.scores.size();
        } else if (row.scores.size() != score_count) {
            fail(file, lineno, "score count differs from previous rows");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_scores(std::span<const ScoreRow> rows, const fs::path& file) {
    std::string out;
    for (const ScoreRow& row : rows) {
        out += row.video_id;
        out += '\t';
        out += std::to_string(row.frame);
        out += '\t';
        out += std::to_string(row.region_id);
        for (const double s : row.scores) {
            out += '\t';
            out += format_real(s);
        }
        out += '\n';
    }
    write_file_atomic(file, out);
}

namespace {

std::vector<std::string> load_actions(const fs::path& file) {
    const auto lines = read_lines(file);
    std::vector<std::string> actions;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) fail(file, i + 1, "empty action label");
        if (!seen.insert(lines[i]).second) fail(file, i + 1, "duplicate action label '" + lines[i] + "'");
        actions.push_back(lines[i]);
    }
    return actions;
}

struct RawFeature {
    FeatureRecord record;
    std::size_t lineno;
};

}  // namespace

Corpus load_corpus(const fs::path& root) {
    if (!fs::is_directory(root)) {
        throw IoError(root.string() + ": corpus root is not a directory");
    }

    Corpus corpus;
    corpus.actions = load_actions(root / "actions.txt");

    const fs::path proposals_file = root / "proposals.tsv";
    const auto proposals = read_proposals(proposals_file);

    // features.tsv, with dimensions checked for corpus-wide consistency.
    const fs::path features_file = root / "features.tsv";
    std::vector<RawFeature> features;
    {
        const auto lines = read_lines(features_file);
        std::set<std::tuple<std::string, int, int>> seen;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const std::size_t lineno = i + 1;
            const auto fields = split_tabs(lines[i]);
            if (fields.size() < 5) {
                fail(features_file, lineno, "expected at least 5 tab-separated fields");
            }
            RawFeature raw;
            raw.lineno = lineno;
            raw.record.video_id = std::string(fields[0]);
            if (raw.record.video_id.empty()) fail(features_file, lineno, "empty video_id");
            raw.record.frame = field_index(features_file, lineno, fields[1], "frame");
            raw.record.region_id = field_index(features_file, lineno, fields[2], "region_id");
            const int dim_s = field_index(features_file, lineno, fields[3], "Ds");
            const int dim_m = field_index(features_file, lineno, fields[4], "Dm");
            if (dim_s + dim_m < 1) fail(features_file, lineno, "feature dimensions must sum to at least 1");
            if (fields.size() != static_cast<std::size_t>(dim_s + dim_m) + 5) {
                fail(features_file, lineno,
                     "declared " + std::to_string(dim_s + dim_m) + " feature values but found " +
                         std::to_string(fields.size() - 5));
            }
            if (corpus.feature_dim_s == 0 && corpus.feature_dim_m == 0) {
                corpus.feature_dim_s = dim_s;
                corpus.feature_dim_m = dim_m;
            } else if (dim_s != corpus.feature_dim_s || dim_m != corpus.feature_dim_m) {
                fail(features_file, lineno, "feature dimensions differ from earlier records");
            }
            for (int d = 0; d < dim_s; ++d) {
                raw.record.phi_s.push_back(
                    field_real(features_file, lineno, fields[static_cast<std::size_t>(d) + 5], "phi_s value"));
            }
            for (int d = 0; d < dim_m; ++d) {
                raw.record.phi_m.push_back(field_real(
                    features_file, lineno, fields[static_cast<std::size_t>(dim_s + d) + 5], "phi_m value"));
            }
            if (!seen.insert({raw.record.video_id, raw.record.frame, raw.record.region_id}).second) {
                fail(features_file, lineno, "duplicate feature record for region");
            }
            features.push_back(std::move(raw));
        }
    }

    // groundtruth.tsv; every action must be in the vocabulary.
    const fs::path gt_file = root / "groundtruth.tsv";
    std::map<std::pair<std::string, int>, GroundTruthTrack> track_map;
    {
        const auto lines = read_lines(gt_file);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const std::size_t lineno = i + 1;
            const auto fields = split_tabs(lines[i]);
            if (fields.size() != 8) {
                fail(gt_file, lineno, "expected 8 tab-separated fields, got " + std::to_string(fields.size()));
            }
            const std::string video_id(fields[0]);
            if (video_id.empty()) fail(gt_file, lineno, "empty video_id");
            const int track_id = field_index(gt_file, lineno, fields[1], "track_id");
            const std::string action(fields[2]);
            if (!corpus.has_action(action)) {
                fail(gt_file, lineno, "action '" + action + "' is not in actions.txt");
            }
            const int frame = field_index(gt_file, lineno, fields[3], "frame");
            const Box box = field_box(gt_file, lineno, std::span(fields).subspan(4));

            auto [it, inserted] = track_map.try_emplace({video_id, track_id});
            GroundTruthTrack& track = it->second;
            if (inserted) {
                track.video_id = video_id;
                track.track_id = track_id;
                track.action = action;
            } else if (track.action != action) {
                fail(gt_file, lineno, "track " + std::to_string(track_id) + " in video '" + video_id +
                                          "' has conflicting action labels");
            }
            for (const FrameBox& fb : track.boxes) {
                if (fb.frame == frame) {
                    fail(gt_file, lineno, "track " + std::to_string(track_id) + " has two boxes on frame " +
                                              std::to_string(frame));
                }
            }
            track.boxes.push_back({frame, box});
        }
    }

    // Optional flow/ tree; <video>/<frame>.flm, nothing else tolerated.
    std::map<std::string, std::map<int, FlowMagnitudeMap>> flow;
    const fs::path flow_root = root / "flow";
    if (fs::exists(flow_root)) {
        std::vector<fs::path> video_dirs;
        for (const auto& entry : fs::directory_iterator(flow_root)) {
            video_dirs.push_back(entry.path());
        }
        std::sort(video_dirs.begin(), video_dirs.end());
        for (const fs::path& dir : video_dirs) {
            if (!fs::is_directory(dir)) {
                fail(dir, 0, "flow/ may contain only per-video directories");
            }
            const std::string video_id = dir.filename().string();
            std::vector<fs::path> files;
            for (const auto& entry : fs::directory_iterator(dir)) {
                files.push_back(entry.path());
            }
            std::sort(files.begin(), files.end());
            for (const fs::path& file : files) {
                if (file.extension() != ".flm") {
                    fail(file, 0, "unexpected file in flow directory (want <frame>.flm)");
                }
                std::uint64_t frame = 0;
                if (!parse_uint(file.stem().string(), frame) || frame > std::numeric_limits<int>::max()) {
                    fail(file, 0, "flow file name must be a non-negative frame index");
                }
                flow[video_id].emplace(static_cast<int>(frame), read_flow_map(file));
            }
        }
    }

    // Assemble videos: T is one past the highest frame referenced anywhere,
    // and indices must be dense.
    std::map<std::string, int> max_frame;
    const auto bump = [&max_frame](const std::string& video_id, int frame) {
        auto [it, inserted] = max_frame.try_emplace(video_id, frame);
        if (!inserted) it->second = std::max(it->second, frame);
    };
    for (const RegionProposal& p : proposals) bump(p.video_id, p.frame);
    for (const RawFeature& f : features) bump(f.record.video_id, f.record.frame);
    for (const auto& [key, track] : track_map) {
        for (const FrameBox& fb : track.boxes) bump(key.first, fb.frame);
    }
    for (const auto& [video_id, maps] : flow) {
        for (const auto& [frame, map] : maps) bump(video_id, frame);
    }

    for (const auto& [video_id, highest] : max_frame) {
        VideoEntry entry;
        entry.frame_count = highest + 1;
        entry.proposals.resize(static_cast<std::size_t>(entry.frame_count));
        entry.features.resize(static_cast<std::size_t>(entry.frame_count));
        entry.flow.resize(static_cast<std::size_t>(entry.frame_count));
        corpus.videos.emplace(video_id, std::move(entry));
    }

    for (const RegionProposal& p : proposals) {
        corpus.videos[p.video_id].proposals[static_cast<std::size_t>(p.frame)].push_back(p);
    }
    for (RawFeature& f : features) {
        VideoEntry& video = corpus.videos[f.record.video_id];
        const auto& frame_proposals = video.proposals[static_cast<std::size_t>(f.record.frame)];
        const bool exists = std::any_of(frame_proposals.begin(), frame_proposals.end(),
                                        [&f](const RegionProposal& p) { return p.region_id == f.record.region_id; });
        if (!exists) {
            fail(features_file, f.lineno,
                 "feature references region_id " + std::to_string(f.record.region_id) + " in video '" +
                     f.record.video_id + "' frame " + std::to_string(f.record.frame) +
                     " but no such proposal exists");
        }
        video.features[static_cast<std::size_t>(f.record.frame)].push_back(std::move(f.record));
    }
    for (auto& [video_id, maps] : flow) {
        VideoEntry& video = corpus.videos[video_id];
        for (auto& [frame, map] : maps) {
            video.flow[static_cast<std::size_t>(frame)] = std::move(map);
        }
    }

    for (auto& [video_id, video] : corpus.videos) {
        for (auto& frame_proposals : video.proposals) {
            std::sort(frame_proposals.begin(), frame_proposals.end(),
                      [](const RegionProposal& a, const RegionProposal& b) { return a.region_id < b.region_id; });
        }
        for (auto& frame_features : video.features) {
            std::sort(frame_features.begin(), frame_features.end(),
                      [](const FeatureRecord& a, const FeatureRecord& b) { return a.region_id < b.region_id; });
        }
    }

    corpus.tracks.reserve(track_map.size());
    for (auto& [key, track] : track_map) {
        std::sort(track.boxes.begin(), track.boxes.end(),
                  [](const FrameBox& a, const FrameBox& b) { return a.frame < b.frame; });
        corpus.tracks.push_back(std::move(track));
    }

    // Density check: every frame of every video must be referenced by at
    // least one source.
    for (const auto& [video_id, video] : corpus.videos) {
        for (int frame = 0; frame < video.frame_count; ++frame) {
            const auto f = static_cast<std::size_t>(frame);
            bool covered = !video.proposals[f].empty() || video.flow[f].has_value();
            if (!covered) {
                for (const GroundTruthTrack& track : corpus.tracks) {
                    if (track.video_id != video_id) continue;
                    covered = std::any_of(track.boxes.begin(), track.boxes.end(),
                                          [frame](const FrameBox& fb) { return fb.frame == frame; });
                    if (covered) break;
                }
            }
            if (!covered) {
                throw ParseError(proposals_file.string(), 0,
                                 "video '" + video_id + "' has no data for frame " + std::to_string(frame) +
                                     " (frame indices must be dense 0..T-1)");
            }
        }
    }

    return corpus;
}

void write_corpus(const Corpus& corpus, const fs::path& root) {
    fs::create_directories(root);

    std::string actions;
    for (const std::string& a : corpus.actions) {
        actions += a;
        actions += '\n';
    }
    write_file_atomic(root / "actions.txt", actions);

    std::vector<RegionProposal> proposals;
    std::string features;
    bool any_flow = false;
    for (const auto& [video_id, video] : corpus.videos) {
        for (int frame = 0; frame < video.frame_count; ++frame) {
            const auto f = static_cast<std::size_t>(frame);
            for (const RegionProposal& p : video.proposals[f]) proposals.push_back(p);
            for (const FeatureRecord& r : video.features[f]) {
                features += r.video_id;
                features += '\t';
                features += std::to_string(r.frame);
                features += '\t';
                features += std::to_string(r.region_id);
                features += '\t';
                features += std::to_string(r.phi_s.size());
                features += '\t';
                features += std::to_string(r.phi_m.size());
                for (const double v : r.phi_s) {
                    features += '\t';
                    features += format_real(v);
                }
                for (const double v : r.phi_m) {
                    features += '\t';
                    features += format_real(v);
                }
                features += '\n';
            }
            any_flow |= video.flow[f].has_value();
        }
    }
    write_proposals(proposals, root / "proposals.tsv");
    write_file_atomic(root / "features.tsv", features);

    std::string gt;
    for (const GroundTruthTrack& track : corpus.tracks) {
        for (const FrameBox& fb : track.boxes) {
            gt += track.video_id;
            gt += '\t';
            gt += std::to_string(track.track_id);
            gt += '\t';
            gt += track.action;
            gt += '\t';
            gt += std::to_string(fb.frame);
            gt += '\t';
            append_box(gt, fb.box);
            gt += '\n';
        }
    }
    write_file_atomic(root / "groundtruth.tsv", gt);

    // Rewrite the flow tree from scratch so stale frames cannot linger.
    const fs::path flow_root = root / "flow";
    fs::remove_all(flow_root);
    if (any_flow) {
        for (const auto& [video_id, video] : corpus.videos) {
            for (int frame = 0; frame < video.frame_count; ++frame) {
                const auto& map = video.flow[static_cast<std::size_t>(frame)];
                if (map.has_value()) {
                    write_flow_map(*map, flow_root / video_id / (std::to_string(frame) + ".flm"));
                }
            }
        }
    }
}

void write_file_atomic(const fs::path& file, const std::string& content) {
    const fs::path parent = file.parent_path();
    if (!parent.empty()) {
        fs::create_directories(parent);
    }
    const fs::path tmp = file.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError(tmp.string() + ": cannot open for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw IoError(tmp.string() + ": write failed");
        }
    }
    fs::rename(tmp, file);
}

}  // namespace tubekit

#include "tubekit/linker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tubekit/error.hpp"

namespace tubekit {

void LinkConfig::validate() const {
    if (!std::isfinite(lambda) || lambda < 0.0) {
        throw InvalidInputError("link config: lambda must be finite and >= 0");
    }
    if (max_tubes < 1) {
        throw InvalidInputError("link config: max_tubes must be positive");
    }
}

double link_score(const ScoredRegion& current, const ScoredRegion& next, double lambda) {
    if (current.frame + 1 != next.frame) {
        throw InvalidInputError("link_score: regions must lie on consecutive frames");
    }
    return current.unary + next.unary + lambda * iou(current.box, next.box);
}

namespace {

void check_frames(std::span<const std::vector<ScoredRegion>> frames) {
    if (frames.empty()) {
        throw InvalidInputError("best_path: no frames");
    }
    const int first = frames.front().empty() ? 0 : frames.front().front().frame;
    for (std::size_t t = 0; t < frames.size(); ++t) {
        if (frames[t].empty()) {
            throw NoFeasiblePathError("frame " + std::to_string(static_cast<int>(t) + first) +
                                      " has no candidate regions");
        }
        for (const ScoredRegion& r : frames[t]) {
            if (r.frame != first + static_cast<int>(t)) {
                throw InvalidInputError("best_path: region frame indices must be consecutive per frame list");
            }
            if (!std::isfinite(r.unary)) {
                throw InvalidInputError("best_path: unary scores must be finite");
            }
        }
    }
}

// argmax with deterministic tie-breaking toward the lower region_id.
bool better(double score, int region_id, double best_score, int best_region_id) {
    if (score != best_score) return score > best_score;
    return region_id < best_region_id;
}

}  // namespace

PathResult best_path(std::span<const std::vector<ScoredRegion>> frames, double lambda) {
    if (!std::isfinite(lambda) || lambda < 0.0) {
        throw InvalidInputError("best_path: lambda must be finite and >= 0");
    }
    check_frames(frames);

    const std::size_t T = frames.size();
    PathResult result;
    result.choices.resize(T);

    if (T == 1) {
        // Degenerate video: no links exist, fall back to the best unary.
        std::size_t best = 0;
        for (std::size_t i = 1; i < frames[0].size(); ++i) {
            if (better(frames[0][i].unary, frames[0][i].region_id, frames[0][best].unary,
                       frames[0][best].region_id)) {
                best = i;
            }
        }
        result.choices[0] = best;
        result.score = frames[0][best].unary;
        return result;
    }

    // Forward pass: value[i] is the best total link score of any path
    // ending at region i of the current frame.
    std::vector<double> value(frames[0].size(), 0.0);
    std::vector<std::vector<std::size_t>> backpointers(T);

    for (std::size_t t = 1; t < T; ++t) {
        const auto& prev = frames[t - 1];
        const auto& cur = frames[t];
        std::vector<double> next_value(cur.size());
        backpointers[t].resize(cur.size());

        for (std::size_t j = 0; j < cur.size(); ++j) {
            std::size_t best_i = 0;
            double best_score = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < prev.size(); ++i) {
                const double candidate = value[i] + link_score(prev[i], cur[j], lambda);
                if (best_score == -std::numeric_limits<double>::infinity() ||
                    better(candidate, prev[i].region_id, best_score, prev[best_i].region_id)) {
                    best_score = candidate;
                    best_i = i;
                }
            }
            next_value[j] = best_score;
            backpointers[t][j] = best_i;
        }
        value = std::move(next_value);
    }

    const auto& last = frames[T - 1];
    std::size_t end = 0;
    for (std::size_t j = 1; j < last.size(); ++j) {
        if (better(value[j], last[j].region_id, value[end], last[end].region_id)) {
            end = j;
        }
    }

    result.choices[T - 1] = end;
    for (std::size_t t = T - 1; t > 0; --t) {
        result.choices[t - 1] = backpointers[t][result.choices[t]];
    }
    result.score = value[end] / static_cast<double>(T);
    return result;
}

std::vector<ActionTube> extract_tubes(const std::string& video_id, const std::string& action,
                                      std::vector<std::vector<ScoredRegion>> frames,
                                      const LinkConfig& config) {
    config.validate();
    for (std::size_t t = 0; t < frames.size(); ++t) {
        for (const ScoredRegion& r : frames[t]) {
            if (r.frame != static_cast<int>(t)) {
                throw InvalidInputError("extract_tubes: frame lists must cover frames 0..T-1 in order");
            }
        }
    }

    std::vector<ActionTube> tubes;
    while (static_cast<int>(tubes.size()) < config.max_tubes) {
        const PathResult path = best_path(frames, config.lambda);

        ActionTube tube;
        tube.video_id = video_id;
        tube.action = action;
        tube.score = path.score;
        tube.regions.reserve(frames.size());
        for (std::size_t t = 0; t < frames.size(); ++t) {
            tube.regions.push_back({static_cast<int>(t), frames[t][path.choices[t]].box});
        }
        tubes.push_back(std::move(tube));

        bool emptied = false;
        for (std::size_t t = 0; t < frames.size(); ++t) {
            frames[t].erase(frames[t].begin() + static_cast<std::ptrdiff_t>(path.choices[t]));
            emptied |= frames[t].empty();
        }
        if (emptied) break;
    }
    return tubes;
}

std::string classify_video(std::span<const ActionTube> tubes,
                           std::span<const std::string> vocabulary) {
    if (tubes.empty()) {
        throw InvalidInputError("classify_video: no tubes");
    }

    const auto vocab_index = [&vocabulary](const std::string& action) {
        for (std::size_t i = 0; i < vocabulary.size(); ++i) {
            if (vocabulary[i] == action) return i;
        }
        throw InvalidInputError("classify_video: action '" + action + "' is not in the vocabulary");
    };

    for (const ActionTube& tube : tubes) {
        if (tube.video_id != tubes.front().video_id) {
            throw InvalidInputError("classify_video: tubes must belong to a single video");
        }
    }

    std::size_t best = 0;
    std::size_t best_vocab = vocab_index(tubes[0].action);
    for (std::size_t i = 1; i < tubes.size(); ++i) {
        const std::size_t vi = vocab_index(tubes[i].action);
        if (tubes[i].score > tubes[best].score ||
            (tubes[i].score == tubes[best].score && vi < best_vocab)) {
            best = i;
            best_vocab = vi;
        }
    }
    return tubes[best].action;
}

}  // namespace tubekit

#include "tubekit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

#include "tubekit/error.hpp"
#include "tubekit/text.hpp"

namespace tubekit {

namespace {

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (const unsigned char c : s) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

const ActionModel& model_for(std::span<const ActionModel> models, const std::string& action) {
    const ActionModel* found = nullptr;
    for (const ActionModel& m : models) {
        if (m.action == action) {
            if (found != nullptr) {
                throw InvalidInputError("more than one model for action '" + action + "'");
            }
            found = &m;
        }
    }
    if (found == nullptr) {
        throw InvalidInputError("no model for action '" + action + "'; run the train stage first");
    }
    return *found;
}

}  // namespace

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("TUBEKIT_THREADS")) {
        std::uint64_t parsed = 0;
        if (!parse_uint(env, parsed) || parsed < 1) {
            throw InvalidInputError("TUBEKIT_THREADS must be a positive integer");
        }
        cap = static_cast<std::size_t>(parsed);
    }
    const std::size_t workers = std::min(cap, count);

    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    const auto work = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    for (std::size_t t = 1; t < workers; ++t) threads.emplace_back(work);
    work();
    for (std::thread& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

FilterResult run_filter(const Corpus& corpus, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw InvalidInputError("filter: alpha must lie in [0, 1]");
    }
    FilterResult result;
    result.report.alpha = alpha;
    for (const auto& [video_id, video] : corpus.videos) {
        for (int frame = 0; frame < video.frame_count; ++frame) {
            const auto f = static_cast<std::size_t>(frame);
            const auto& proposals = video.proposals[f];
            if (proposals.empty()) continue;
            if (!video.flow[f].has_value()) {
                throw IoError("no flow map for video '" + video_id + "' frame " + std::to_string(frame) +
                              " (expected flow/" + video_id + "/" + std::to_string(frame) + ".flm)");
            }
            auto [retained, report] = filter_regions(proposals, *video.flow[f], alpha);
            result.report.total_count += report.total_count;
            result.report.retained_count += report.retained_count;
            for (RegionProposal& p : retained) result.retained.push_back(std::move(p));
        }
    }
    result.report.discard_fraction =
        result.report.total_count > 0
            ? 1.0 - static_cast<double>(result.report.retained_count) /
                        static_cast<double>(result.report.total_count)
            : 0.0;
    return result;
}

std::vector<ActionModel> run_train(const Corpus& corpus, const TrainConfig& config) {
    config.validate();
    if (corpus.actions.empty()) {
        throw TrainingError("corpus has an empty action vocabulary");
    }
    std::vector<ActionModel> models(corpus.actions.size());
    parallel_for(corpus.actions.size(), [&](std::size_t i) {
        const std::string& action = corpus.actions[i];
        const TrainingSet set = assign_training_labels(corpus, action, config.neg_overlap);
        if (set.negatives.empty()) {
            throw TrainingError("no negative examples for action '" + action + "'");
        }
        TrainConfig per_action = config;
        per_action.seed = config.seed ^ fnv1a64(action);
        models[i] = train_svm(action, set.positives, set.negatives, per_action);
    });
    return models;
}

namespace {

// A scoreable region: a proposal joined with its fused feature vector.
struct PoolEntry {
    int region_id = 0;
    Box box;
    std::vector<double> phi;
};

using FramePool = std::vector<std::vector<PoolEntry>>;

const RegionProposal* find_proposal(const VideoEntry& video, int frame, int region_id) {
    const auto& proposals = video.proposals[static_cast<std::size_t>(frame)];
    const auto it = std::lower_bound(proposals.begin(), proposals.end(), region_id,
                                     [](const RegionProposal& p, int id) { return p.region_id < id; });
    if (it == proposals.end() || it->region_id != region_id) return nullptr;
    return &*it;
}

// Per-video pools of scoreable regions from the requested proposal set.
std::map<std::string, FramePool> build_pools(const Corpus& corpus,
                                             const std::vector<RegionProposal>* proposals) {
    std::map<std::string, FramePool> pools;
    for (const auto& [video_id, video] : corpus.videos) {
        pools.emplace(video_id, FramePool(static_cast<std::size_t>(video.frame_count)));
    }

    const auto add = [&corpus, &pools](const RegionProposal& p, bool must_exist) {
        const auto video_it = corpus.videos.find(p.video_id);
        if (video_it == corpus.videos.end() || p.frame >= video_it->second.frame_count) {
            throw InvalidInputError("proposal references unknown video '" + p.video_id + "' frame " +
                                    std::to_string(p.frame));
        }
        if (must_exist) {
            const RegionProposal* original = find_proposal(video_it->second, p.frame, p.region_id);
            if (original == nullptr || original->box != p.box) {
                throw InvalidInputError("proposal (video '" + p.video_id + "', frame " +
                                        std::to_string(p.frame) + ", region " + std::to_string(p.region_id) +
                                        ") does not match the corpus");
            }
        }
        const FeatureRecord* feature = corpus.find_feature(p.video_id, p.frame, p.region_id);
        if (feature == nullptr) return;  // not scoreable
        PoolEntry entry;
        entry.region_id = p.region_id;
        entry.box = p.box;
        entry.phi = fuse(feature->phi_s, feature->phi_m).phi;
        pools[p.video_id][static_cast<std::size_t>(p.frame)].push_back(std::move(entry));
    };

    if (proposals != nullptr) {
        for (const RegionProposal& p : *proposals) add(p, true);
    } else {
        for (const auto& [video_id, video] : corpus.videos) {
            for (const auto& frame_proposals : video.proposals) {
                for (const RegionProposal& p : frame_proposals) add(p, false);
            }
        }
    }
    return pools;
}

}  // namespace

std::vector<ScoreRow> run_score(const Corpus& corpus, std::span<const ActionModel> models,
                                const std::vector<RegionProposal>* proposals) {
    for (const std::string& action : corpus.actions) model_for(models, action);

    const auto pools = build_pools(corpus, proposals);
    std::vector<ScoreRow> rows;
    for (const auto& [video_id, pool] : pools) {
        for (std::size_t frame = 0; frame < pool.size(); ++frame) {
            for (const PoolEntry& entry : pool[frame]) {
                ScoreRow row;
                row.video_id = video_id;
                row.frame = static_cast<int>(frame);
                row.region_id = entry.region_id;
                for (const auto& [action, score] : score_vector(models, corpus.actions, entry.phi)) {
                    row.scores.push_back(score);
                }
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

std::vector<ActionTube> run_link(const Corpus& corpus, std::span<const ActionModel> models,
                                 const LinkConfig& config,
                                 const std::vector<RegionProposal>* proposals) {
    config.validate();
    for (const std::string& action : corpus.actions) model_for(models, action);

    auto pools = build_pools(corpus, proposals);

    // Frames left empty by filtering fall back to the most motion-salient
    // scoreable proposal of the frame, so every video stays linkable.
    for (auto& [video_id, pool] : pools) {
        const VideoEntry& video = corpus.videos.at(video_id);
        for (std::size_t frame = 0; frame < pool.size(); ++frame) {
            if (!pool[frame].empty()) continue;
            if (!video.flow[frame].has_value()) {
                throw NoFeasiblePathError("video '" + video_id + "' frame " + std::to_string(frame) +
                                          " has no proposals in the pool and no flow map to fall back on");
            }
            const FlowMagnitudeMap normalized = normalize(*video.flow[frame]);
            std::vector<PoolEntry> candidates;
            std::size_t best = 0;
            double best_score = 0.0;
            for (const RegionProposal& p : video.proposals[frame]) {
                const FeatureRecord* feature = corpus.find_feature(video_id, p.frame, p.region_id);
                if (feature == nullptr) continue;
                PoolEntry entry;
                entry.region_id = p.region_id;
                entry.box = p.box;
                entry.phi = fuse(feature->phi_s, feature->phi_m).phi;
                candidates.push_back(std::move(entry));
                const double score = region_motion_score(normalized, p.box);
                if (candidates.size() == 1 || score > best_score) {
                    best = candidates.size() - 1;
                    best_score = score;
                }
            }
            if (candidates.empty()) {
                throw NoFeasiblePathError("video '" + video_id + "' frame " + std::to_string(frame) +
                                          " has no proposals with features to fall back on");
            }
            pool[frame].push_back(std::move(candidates[best]));
        }
    }

    // Deterministic work list: videos in id order, actions in vocabulary
    // order. Each item is independent.
    std::vector<std::pair<const std::string*, const FramePool*>> videos;
    for (const auto& [video_id, pool] : pools) {
        videos.emplace_back(&video_id, &pool);
    }
    const std::size_t actions = corpus.actions.size();
    std::vector<std::vector<ActionTube>> results(videos.size() * actions);

    parallel_for(results.size(), [&](std::size_t index) {
        const auto& [video_id, pool] = videos[index / actions];
        const std::string& action = corpus.actions[index % actions];
        const ActionModel& model = model_for(models, action);

        std::vector<std::vector<ScoredRegion>> frames(pool->size());
        for (std::size_t t = 0; t < pool->size(); ++t) {
            frames[t].reserve((*pool)[t].size());
            for (const PoolEntry& entry : (*pool)[t]) {
                frames[t].push_back(ScoredRegion{entry.region_id, static_cast<int>(t), entry.box,
                                                 score_region(model, entry.phi)});
            }
        }
        results[index] = extract_tubes(*video_id, action, std::move(frames), config);
    });

    std::vector<ActionTube> tubes;
    for (auto& group : results) {
        for (ActionTube& tube : group) tubes.push_back(std::move(tube));
    }
    return tubes;
}

std::vector<std::pair<std::string, std::string>> run_classify(std::span<const ActionTube> tubes,
                                                              std::span<const std::string> vocabulary) {
    std::map<std::string, std::vector<ActionTube>> by_video;
    for (const ActionTube& tube : tubes) {
        by_video[tube.video_id].push_back(tube);
    }
    std::vector<std::pair<std::string, std::string>> labels;
    labels.reserve(by_video.size());
    for (const auto& [video_id, video_tubes] : by_video) {
        labels.emplace_back(video_id, classify_video(video_tubes, vocabulary));
    }
    return labels;
}

std::vector<Detection> scores_to_detections(const Corpus& corpus, std::span<const ScoreRow> rows) {
    std::vector<Detection> detections;
    detections.reserve(rows.size() * corpus.actions.size());
    for (const ScoreRow& row : rows) {
        const auto video_it = corpus.videos.find(row.video_id);
        if (video_it == corpus.videos.end() || row.frame >= video_it->second.frame_count) {
            throw InvalidInputError("score row references unknown video '" + row.video_id + "' frame " +
                                    std::to_string(row.frame));
        }
        const RegionProposal* proposal = find_proposal(video_it->second, row.frame, row.region_id);
        if (proposal == nullptr) {
            throw InvalidInputError("score row references unknown region " + std::to_string(row.region_id) +
                                    " in video '" + row.video_id + "' frame " + std::to_string(row.frame));
        }
        if (row.scores.size() != corpus.actions.size()) {
            throw InvalidInputError("score row carries " + std::to_string(row.scores.size()) +
                                    " scores but the vocabulary has " + std::to_string(corpus.actions.size()));
        }
        for (std::size_t a = 0; a < corpus.actions.size(); ++a) {
            Detection d;
            d.video_id = row.video_id;
            d.frame = row.frame;
            d.box = proposal->box;
            d.action = corpus.actions[a];
            d.score = row.scores[a];
            detections.push_back(std::move(d));
        }
    }
    return detections;
}

EvalReport run_eval(const Corpus& corpus, const std::vector<ScoreRow>* scores,
                    const std::vector<ActionTube>* tubes, const EvalConfig& config) {
    if (scores == nullptr && tubes == nullptr) {
        throw InvalidInputError("eval: need a score table, a tube file, or both");
    }

    EvalReport report;
    if (scores != nullptr) {
        const auto detections = scores_to_detections(corpus, *scores);
        report.frame = frame_ap(detections, corpus.tracks, corpus.actions, config.sigma);
    }
    if (tubes != nullptr) {
        report.video = video_ap(*tubes, corpus.tracks, corpus.actions, config.sigma);
        report.roc = roc_auc(*tubes, corpus.tracks, config.sigma, config.fpr_max, config.topk);

        // Whole-video classification against the annotated action of each
        // video with ground truth.
        std::map<std::string, std::string> truth;
        for (const GroundTruthTrack& track : corpus.tracks) {
            const auto [it, inserted] = truth.try_emplace(track.video_id, track.action);
            if (!inserted && it->second != track.action) {
                throw InvalidInputError("video '" + track.video_id +
                                        "' has tracks of different actions; whole-video label is undefined");
            }
        }
        const auto predicted = run_classify(*tubes, corpus.actions);
        std::vector<std::pair<std::string, std::string>> pairs;
        for (const auto& [video_id, true_action] : truth) {
            const auto it = std::find_if(predicted.begin(), predicted.end(),
                                         [&video_id](const auto& p) { return p.first == video_id; });
            if (it == predicted.end()) {
                throw InvalidInputError("no tubes for video '" + video_id + "'; run the link stage first");
            }
            pairs.emplace_back(true_action, it->second);
        }
        report.confusion = confusion_matrix(pairs, corpus.actions);
    }
    return report;
}

}  // namespace tubekit

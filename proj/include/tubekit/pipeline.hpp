#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tubekit/classifier.hpp"
#include "tubekit/corpus.hpp"
#include "tubekit/linker.hpp"
#include "tubekit/metrics.hpp"

namespace tubekit {

// Batch stages behind the CLI subcommands. Every stage is a pure function
// of (corpus, inputs, config), so re-running one reproduces its output
// byte for byte.

struct FilterResult {
    std::vector<RegionProposal> retained;  // corpus order
    SaliencyReport report;                 // aggregated over all frames
};

// Motion-saliency filtering of every frame of every video. Requires a flow
// map for each frame that has proposals.
FilterResult run_filter(const Corpus& corpus, double alpha);

// One SVM per vocabulary action. Per-action seeds derive from config.seed
// and the action name, so results do not depend on scheduling.
std::vector<ActionModel> run_train(const Corpus& corpus, const TrainConfig& config);

// Score table over the given proposals (default: all corpus proposals).
// Proposals without feature records are skipped.
std::vector<ScoreRow> run_score(const Corpus& corpus, std::span<const ActionModel> models,
                                const std::vector<RegionProposal>* proposals = nullptr);

// Tube extraction per (video, action). When a frame has no usable proposal
// in the pool (possible after aggressive filtering), it falls back to the
// single most motion-salient proposal of that frame in the corpus.
std::vector<ActionTube> run_link(const Corpus& corpus, std::span<const ActionModel> models,
                                 const LinkConfig& config,
                                 const std::vector<RegionProposal>* proposals = nullptr);

// Per-video label via the best tube across actions; (video_id, label)
// pairs sorted by video_id.
std::vector<std::pair<std::string, std::string>> run_classify(std::span<const ActionTube> tubes,
                                                              std::span<const std::string> vocabulary);

// Joins a score table back onto corpus proposals, one detection per
// (region, action).
std::vector<Detection> scores_to_detections(const Corpus& corpus, std::span<const ScoreRow> rows);

struct EvalConfig {
    double sigma = 0.5;
    double fpr_max = 0.6;
    int topk = 3;
};

struct EvalReport {
    std::optional<APReport> frame;        // when a score table was provided
    std::optional<APReport> video;        // when tubes were provided
    std::optional<RocCurve> roc;
    std::optional<ConfusionMatrix> confusion;
};

EvalReport run_eval(const Corpus& corpus, const std::vector<ScoreRow>* scores,
                    const std::vector<ActionTube>* tubes, const EvalConfig& config);

// Bounded worker-thread map over [0, count). The cap comes from
// TUBEKIT_THREADS when set, otherwise the hardware concurrency. Results
// must be written to per-index slots; the call itself adds no ordering.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace tubekit

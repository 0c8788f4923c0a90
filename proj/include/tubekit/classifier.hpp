#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tubekit/corpus.hpp"
#include "tubekit/model.hpp"

namespace tubekit {

// Concatenation of appearance then motion features for one region.
struct FusedFeature {
    std::vector<double> phi;

    bool operator==(const FusedFeature&) const = default;
};

FusedFeature fuse(std::span<const double> phi_s, std::span<const double> phi_m);

struct TrainConfig {
    double neg_overlap = 0.3;     // proposals below this IoU vs ground truth are negatives
    double cost = 1.0;            // hinge-loss weight C
    int hnm_rounds = 5;           // cap on mining rounds (solver invocations)
    int initial_neg_per_pos = 10; // seeds the first active negative set
    std::uint64_t seed = 0;
    int max_iterations = 10000;   // inner solver iteration cap
    double tolerance = 1e-6;      // stop when the objective change falls below this

    void validate() const;
};

struct TrainingSet {
    std::vector<FusedFeature> positives;
    std::vector<FusedFeature> negatives;
};

// Positives are the fused features of the action's ground-truth boxes
// (which must appear among the proposals with feature records). Negatives
// are proposal features whose best IoU against the action's ground truth
// in the same frame falls below neg_overlap. Proposals in between belong
// to neither set.
TrainingSet assign_training_labels(const Corpus& corpus, const std::string& action,
                                   double neg_overlap);

struct TrainDiagnostics {
    int rounds = 0;                  // solver invocations
    bool fully_mined = false;        // no margin violator left outside the active set
    std::size_t active_negatives = 0;
    double objective = 0.0;          // regularized hinge objective of the returned model
    int iterations_last_round = 0;
    std::vector<bool> active;                 // final active mask over the negatives
    std::vector<std::size_t> active_history;  // active count at each round's entry
};

// L2-regularized hinge-loss SVM trained by deterministic batch subgradient
// descent, wrapped in a hard-negative-mining loop: train on a seeded subset
// of negatives, pull in every negative scoring above the margin (> -1),
// retrain, and stop when no new violators appear or hnm_rounds is spent.
// Identical inputs and seed produce a bit-identical model.
ActionModel train_svm(const std::string& action, std::span<const FusedFeature> positives,
                      std::span<const FusedFeature> negatives, const TrainConfig& config,
                      TrainDiagnostics* diagnostics = nullptr);

}  // namespace tubekit

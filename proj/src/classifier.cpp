#include "tubekit/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tubekit/error.hpp"
#include "tubekit/prng.hpp"

namespace tubekit {

void TrainConfig::validate() const {
    if (!(neg_overlap >= 0.0 && neg_overlap < 1.0)) {
        throw InvalidInputError("train config: neg_overlap must lie in [0, 1)");
    }
    if (!(cost > 0.0) || !std::isfinite(cost)) {
        throw InvalidInputError("train config: C must be positive");
    }
    if (hnm_rounds < 1) {
        throw InvalidInputError("train config: hnm_rounds must be at least 1");
    }
    if (initial_neg_per_pos < 1) {
        throw InvalidInputError("train config: initial_neg_per_pos must be at least 1");
    }
    if (max_iterations < 1 || !(tolerance >= 0.0)) {
        throw InvalidInputError("train config: bad solver limits");
    }
}

FusedFeature fuse(std::span<const double> phi_s, std::span<const double> phi_m) {
    FusedFeature fused;
    fused.phi.reserve(phi_s.size() + phi_m.size());
    for (const double v : phi_s) {
        if (!std::isfinite(v)) throw InvalidInputError("fuse: phi_s has a non-finite value");
        fused.phi.push_back(v);
    }
    for (const double v : phi_m) {
        if (!std::isfinite(v)) throw InvalidInputError("fuse: phi_m has a non-finite value");
        fused.phi.push_back(v);
    }
    return fused;
}

TrainingSet assign_training_labels(const Corpus& corpus, const std::string& action,
                                   double neg_overlap) {
    if (!corpus.has_action(action)) {
        throw TrainingError("no action '" + action + "' in the corpus vocabulary");
    }
    if (!(neg_overlap >= 0.0 && neg_overlap < 1.0)) {
        throw InvalidInputError("assign_training_labels: neg_overlap must lie in [0, 1)");
    }

    TrainingSet set;
    for (const auto& [video_id, video] : corpus.videos) {
        // Ground-truth boxes of this action, per frame.
        std::vector<std::vector<Box>> gt_boxes(static_cast<std::size_t>(video.frame_count));
        for (const GroundTruthTrack& track : corpus.tracks) {
            if (track.video_id != video_id || track.action != action) continue;
            for (const FrameBox& fb : track.boxes) {
                gt_boxes[static_cast<std::size_t>(fb.frame)].push_back(fb.box);

                // Each ground-truth box is a positive; it must be present
                // among the proposals and carry features.
                const auto& frame_proposals = video.proposals[static_cast<std::size_t>(fb.frame)];
                const FeatureRecord* feature = nullptr;
                for (const RegionProposal& p : frame_proposals) {
                    if (p.box == fb.box) {
                        feature = corpus.find_feature(video_id, fb.frame, p.region_id);
                        if (feature != nullptr) break;
                    }
                }
                if (feature == nullptr) {
                    throw TrainingError("action '" + action + "': ground-truth box in video '" + video_id +
                                        "' frame " + std::to_string(fb.frame) +
                                        " has no matching proposal with features");
                }
                set.positives.push_back(fuse(feature->phi_s, feature->phi_m));
            }
        }

        for (int frame = 0; frame < video.frame_count; ++frame) {
            const auto f = static_cast<std::size_t>(frame);
            for (const FeatureRecord& record : video.features[f]) {
                const RegionProposal* proposal = nullptr;
                for (const RegionProposal& p : video.proposals[f]) {
                    if (p.region_id == record.region_id) {
                        proposal = &p;
                        break;
                    }
                }
                double best = 0.0;
                for (const Box& gt : gt_boxes[f]) {
                    best = std::max(best, iou(proposal->box, gt));
                }
                // Below the threshold: negative. At or above: either a
                // positive (exact ground-truth box, collected above) or
                // excluded from training entirely.
                if (best < neg_overlap) {
                    set.negatives.push_back(fuse(record.phi_s, record.phi_m));
                }
            }
        }
    }

    if (set.positives.empty()) {
        throw TrainingError("no positive examples for action '" + action + "'");
    }
    return set;
}

namespace {

struct SolveResult {
    std::vector<double> weights;
    double bias = 0.0;
    double objective = 0.0;
    int iterations = 0;
};

double objective_value(std::span<const FusedFeature> samples, std::span<const double> labels,
                       std::span<const double> w, double b, double cost) {
    double hinge = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double s = b;
        const auto& x = samples[i].phi;
        for (std::size_t d = 0; d < x.size(); ++d) s += w[d] * x[d];
        hinge += std::max(0.0, 1.0 - labels[i] * s);
    }
    double norm = 0.0;
    for (const double v : w) norm += v * v;
    return 0.5 * norm + cost * hinge;
}

// Batch subgradient descent on (1/2)|w|^2 + C * sum hinge with the Polyak
// step rule (step = objective / |subgradient|^2, zero as the optimum lower
// bound). The step size self-scales with the batch, so the solver behaves
// identically across sample counts. Tracks the best iterate seen, so the
// returned objective never exceeds the entry objective. Fully deterministic
// for a fixed sample order.
SolveResult solve_hinge(std::span<const FusedFeature> samples, std::span<const double> labels,
                        std::size_t dim, double cost, int max_iterations, double tolerance) {
    std::vector<double> w(dim, 0.0);
    double b = 0.0;

    SolveResult best;
    best.weights = w;
    best.bias = b;
    best.objective = objective_value(samples, labels, w, b, cost);

    std::vector<double> scores(samples.size());
    std::vector<double> grad(dim);
    double current = best.objective;

    int t = 0;
    for (; t < max_iterations; ++t) {
        for (std::size_t i = 0; i < samples.size(); ++i) {
            double s = b;
            const auto& x = samples[i].phi;
            for (std::size_t d = 0; d < dim; ++d) s += w[d] * x[d];
            scores[i] = s;
        }

        std::copy(w.begin(), w.end(), grad.begin());
        double grad_b = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (labels[i] * scores[i] < 1.0) {
                const auto& x = samples[i].phi;
                for (std::size_t d = 0; d < dim; ++d) grad[d] -= cost * labels[i] * x[d];
                grad_b -= cost * labels[i];
            }
        }

        double grad_norm2 = grad_b * grad_b;
        for (const double g : grad) grad_norm2 += g * g;
        if (grad_norm2 <= 1e-24) {
            break;  // zero subgradient: nothing to improve
        }

        const double step = current / grad_norm2;
        for (std::size_t d = 0; d < dim; ++d) w[d] -= step * grad[d];
        b -= step * grad_b;

        const double previous = current;
        current = objective_value(samples, labels, w, b, cost);
        if (!std::isfinite(current)) {
            throw TrainingError("svm solver diverged: objective became non-finite at iteration " +
                                std::to_string(t));
        }
        if (current < best.objective) {
            best.weights = w;
            best.bias = b;
            best.objective = current;
        }
        if (std::abs(current - previous) <= tolerance) {
            ++t;
            break;
        }
    }

    best.iterations = t;
    return best;
}

}  // namespace

ActionModel train_svm(const std::string& action, std::span<const FusedFeature> positives,
                      std::span<const FusedFeature> negatives, const TrainConfig& config,
                      TrainDiagnostics* diagnostics) {
    config.validate();
    if (positives.empty()) throw TrainingError("train_svm: no positives for action '" + action + "'");
    if (negatives.empty()) throw TrainingError("train_svm: no negatives for action '" + action + "'");

    const std::size_t dim = positives.front().phi.size();
    for (const auto& sample : positives) {
        if (sample.phi.size() != dim) throw InvalidInputError("train_svm: inconsistent feature dimensions");
    }
    for (const auto& sample : negatives) {
        if (sample.phi.size() != dim) throw InvalidInputError("train_svm: inconsistent feature dimensions");
    }

    // Seed the active set with a random subset of negatives.
    const std::size_t initial =
        std::min(negatives.size(),
                 static_cast<std::size_t>(config.initial_neg_per_pos) * positives.size());
    std::vector<std::size_t> order(negatives.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Prng rng(config.seed);
    rng.shuffle(order);

    std::vector<bool> active(negatives.size(), false);
    for (std::size_t i = 0; i < initial; ++i) active[order[i]] = true;

    const auto build_problem = [&](std::vector<FusedFeature>& samples, std::vector<double>& labels) {
        samples.clear();
        labels.clear();
        for (const auto& p : positives) {
            samples.push_back(p);
            labels.push_back(1.0);
        }
        for (std::size_t i = 0; i < negatives.size(); ++i) {
            if (active[i]) {
                samples.push_back(negatives[i]);
                labels.push_back(-1.0);
            }
        }
    };

    std::vector<FusedFeature> samples;
    std::vector<double> labels;
    SolveResult solved;
    int rounds = 0;
    bool fully_mined = false;
    std::vector<std::size_t> active_history;

    while (true) {
        active_history.push_back(static_cast<std::size_t>(std::count(active.begin(), active.end(), true)));
        build_problem(samples, labels);
        solved = solve_hinge(samples, labels, dim, config.cost, config.max_iterations, config.tolerance);
        ++rounds;

        // Mine: any inactive negative scoring inside the margin violates
        // the model and must join the active set for the next round.
        std::vector<std::size_t> violators;
        for (std::size_t i = 0; i < negatives.size(); ++i) {
            if (active[i]) continue;
            double s = solved.bias;
            const auto& x = negatives[i].phi;
            for (std::size_t d = 0; d < dim; ++d) s += solved.weights[d] * x[d];
            if (s > -1.0) violators.push_back(i);
        }
        if (violators.empty()) {
            fully_mined = true;
            break;
        }
        if (rounds >= config.hnm_rounds) {
            break;  // violators remain, but the round budget is spent
        }
        for (const std::size_t i : violators) active[i] = true;
    }

    if (diagnostics != nullptr) {
        diagnostics->rounds = rounds;
        diagnostics->fully_mined = fully_mined;
        diagnostics->active_negatives =
            static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
        diagnostics->objective = solved.objective;
        diagnostics->iterations_last_round = solved.iterations;
        diagnostics->active = active;
        diagnostics->active_history = std::move(active_history);
    }

    ActionModel model;
    model.action = action;
    model.weights = std::move(solved.weights);
    model.bias = solved.bias;
    return model;
}

}  // namespace tubekit

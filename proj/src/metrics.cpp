#include "tubekit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tubekit/error.hpp"

namespace tubekit {

namespace {

void check_sigma(double sigma) {
    if (!(sigma > 0.0 && sigma <= 1.0)) {
        throw InvalidInputError("sigma must lie in (0, 1]");
    }
}

std::size_t vocab_index(std::span<const std::string> vocabulary, const std::string& action,
                        const char* what) {
    for (std::size_t i = 0; i < vocabulary.size(); ++i) {
        if (vocabulary[i] == action) return i;
    }
    throw InvalidInputError(std::string(what) + " carries action '" + action +
                            "' which is not in the vocabulary");
}

// Sorted by score descending; equal scores form one threshold group and the
// greedy matcher visits them in input order.
std::vector<std::size_t> rank_by_score(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

// All-points average precision: walk the ranked list grouping tied scores,
// then integrate the precision envelope over recall.
PRCurve pr_curve_from_ranked(std::span<const double> scores, std::span<const std::size_t> order,
                             const std::vector<bool>& is_tp, std::size_t gt_count) {
    PRCurve curve;
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t k = 0; k < order.size();) {
        const double threshold = scores[order[k]];
        while (k < order.size() && scores[order[k]] == threshold) {
            if (is_tp[order[k]]) {
                ++tp;
            } else {
                ++fp;
            }
            ++k;
        }
        PRPoint point;
        point.threshold = threshold;
        point.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        point.recall = static_cast<double>(tp) / static_cast<double>(gt_count);
        curve.points.push_back(point);
    }

    double envelope = 0.0;
    for (std::size_t k = curve.points.size(); k > 0; --k) {
        const PRPoint& point = curve.points[k - 1];
        envelope = std::max(envelope, point.precision);
        const double prev_recall = k > 1 ? curve.points[k - 2].recall : 0.0;
        curve.ap += (point.recall - prev_recall) * envelope;
    }
    return curve;
}

}  // namespace

APReport frame_ap(std::span<const Detection> detections, std::span<const GroundTruthTrack> groundtruth,
                  std::span<const std::string> vocabulary, double sigma) {
    check_sigma(sigma);
    for (const Detection& d : detections) {
        vocab_index(vocabulary, d.action, "detection");
        if (!std::isfinite(d.score)) throw InvalidInputError("detection score must be finite");
    }

    APReport report;
    for (const std::string& action : vocabulary) {
        // Ground-truth boxes of this class, keyed by (video, frame).
        std::map<std::pair<std::string, int>, std::vector<std::pair<Box, bool>>> instances;
        std::size_t gt_count = 0;
        for (const GroundTruthTrack& track : groundtruth) {
            if (track.action != action) continue;
            for (const FrameBox& fb : track.boxes) {
                instances[{track.video_id, fb.frame}].emplace_back(fb.box, false);
                ++gt_count;
            }
        }

        ClassAP entry;
        entry.action = action;
        entry.gt_count = gt_count;
        if (gt_count == 0) {
            report.per_class.push_back(std::move(entry));
            continue;
        }
        entry.defined = true;

        std::vector<double> scores;
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < detections.size(); ++i) {
            if (detections[i].action == action) {
                candidates.push_back(i);
                scores.push_back(detections[i].score);
            }
        }
        const auto order = rank_by_score(scores);

        std::vector<bool> is_tp(candidates.size(), false);
        for (const std::size_t rank : order) {
            const Detection& det = detections[candidates[rank]];
            const auto it = instances.find({det.video_id, det.frame});
            if (it == instances.end()) continue;
            std::pair<Box, bool>* best = nullptr;
            double best_iou = 0.0;
            for (auto& candidate : it->second) {
                if (candidate.second) continue;
                const double overlap = iou(det.box, candidate.first);
                if (best == nullptr || overlap > best_iou) {
                    best = &candidate;
                    best_iou = overlap;
                }
            }
            if (best != nullptr && best_iou > sigma) {
                best->second = true;
                is_tp[rank] = true;
            }
        }

        entry.curve = pr_curve_from_ranked(scores, order, is_tp, gt_count);
        entry.ap = entry.curve.ap;
        report.per_class.push_back(std::move(entry));
    }

    for (const ClassAP& entry : report.per_class) {
        if (entry.defined) {
            report.mean_ap += entry.ap;
            ++report.defined_classes;
        }
    }
    if (report.defined_classes > 0) {
        report.mean_ap /= static_cast<double>(report.defined_classes);
    }
    return report;
}

namespace {

// Shared tube-vs-track matcher for video_ap and roc_auc. Returns one flag
// per entry of `order`, marking tubes whose mean per-frame IoU against a
// previously unmatched same-video track of their class exceeds sigma.
std::vector<bool> match_tubes(std::span<const ActionTube> tubes, std::span<const std::size_t> order,
                              std::span<const GroundTruthTrack> groundtruth, double sigma) {
    std::vector<bool> matched_track(groundtruth.size(), false);
    std::vector<bool> is_tp(tubes.size(), false);
    for (const std::size_t rank : order) {
        const ActionTube& tube = tubes[rank];
        std::size_t best_track = groundtruth.size();
        double best_overlap = 0.0;
        for (std::size_t g = 0; g < groundtruth.size(); ++g) {
            if (matched_track[g]) continue;
            const GroundTruthTrack& track = groundtruth[g];
            if (track.video_id != tube.video_id || track.action != tube.action) continue;
            const double overlap = mean_frame_iou(tube.regions, track.boxes);
            if (best_track == groundtruth.size() || overlap > best_overlap) {
                best_track = g;
                best_overlap = overlap;
            }
        }
        if (best_track != groundtruth.size() && best_overlap > sigma) {
            matched_track[best_track] = true;
            is_tp[rank] = true;
        }
    }
    return is_tp;
}

}  // namespace

APReport video_ap(std::span<const ActionTube> tubes, std::span<const GroundTruthTrack> groundtruth,
                  std::span<const std::string> vocabulary, double sigma) {
    check_sigma(sigma);
    for (const ActionTube& tube : tubes) {
        vocab_index(vocabulary, tube.action, "tube");
        if (!std::isfinite(tube.score)) throw InvalidInputError("tube score must be finite");
    }

    APReport report;
    for (const std::string& action : vocabulary) {
        std::vector<GroundTruthTrack> class_tracks;
        for (const GroundTruthTrack& track : groundtruth) {
            if (track.action == action) class_tracks.push_back(track);
        }

        ClassAP entry;
        entry.action = action;
        entry.gt_count = class_tracks.size();
        if (class_tracks.empty()) {
            report.per_class.push_back(std::move(entry));
            continue;
        }
        entry.defined = true;

        std::vector<ActionTube> class_tubes;
        std::vector<double> scores;
        for (const ActionTube& tube : tubes) {
            if (tube.action == action) {
                class_tubes.push_back(tube);
                scores.push_back(tube.score);
            }
        }
        const auto order = rank_by_score(scores);
        const auto is_tp = match_tubes(class_tubes, order, class_tracks, sigma);

        entry.curve = pr_curve_from_ranked(scores, order, is_tp, class_tracks.size());
        entry.ap = entry.curve.ap;
        report.per_class.push_back(std::move(entry));
    }

    for (const ClassAP& entry : report.per_class) {
        if (entry.defined) {
            report.mean_ap += entry.ap;
            ++report.defined_classes;
        }
    }
    if (report.defined_classes > 0) {
        report.mean_ap /= static_cast<double>(report.defined_classes);
    }
    return report;
}

RocCurve roc_auc(std::span<const ActionTube> tubes, std::span<const GroundTruthTrack> groundtruth,
                 double sigma, double fpr_max, int topk) {
    check_sigma(sigma);
    if (topk < 1) throw InvalidInputError("roc_auc: topk must be at least 1");
    if (!(fpr_max > 0.0 && fpr_max <= 1.0)) throw InvalidInputError("roc_auc: fpr_max must lie in (0, 1]");
    if (groundtruth.empty()) {
        throw InvalidInputError("roc_auc: undefined without ground-truth tracks");
    }
    for (const ActionTube& tube : tubes) {
        if (!std::isfinite(tube.score)) throw InvalidInputError("tube score must be finite");
    }

    // Keep the top-k scoring tubes per (class, video).
    std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < tubes.size(); ++i) {
        groups[{tubes[i].action, tubes[i].video_id}].push_back(i);
    }
    std::vector<ActionTube> retained;
    {
        std::vector<bool> keep(tubes.size(), false);
        for (auto& [key, indices] : groups) {
            std::stable_sort(indices.begin(), indices.end(),
                             [&tubes](std::size_t a, std::size_t b) { return tubes[a].score > tubes[b].score; });
            for (std::size_t r = 0; r < indices.size() && r < static_cast<std::size_t>(topk); ++r) {
                keep[indices[r]] = true;
            }
        }
        for (std::size_t i = 0; i < tubes.size(); ++i) {
            if (keep[i]) retained.push_back(tubes[i]);
        }
    }

    std::vector<double> scores;
    scores.reserve(retained.size());
    for (const ActionTube& tube : retained) scores.push_back(tube.score);
    const auto order = rank_by_score(scores);
    const auto is_tp = match_tubes(retained, order, groundtruth, sigma);

    RocCurve curve;
    curve.retained_tubes = retained.size();
    curve.false_tubes = retained.size() - static_cast<std::size_t>(std::count(is_tp.begin(), is_tp.end(), true));

    const double total_tracks = static_cast<double>(groundtruth.size());
    const double total_false = static_cast<double>(curve.false_tubes);

    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t k = 0; k < order.size();) {
        const double threshold = scores[order[k]];
        while (k < order.size() && scores[order[k]] == threshold) {
            if (is_tp[order[k]]) {
                ++tp;
            } else {
                ++fp;
            }
            ++k;
        }
        RocPoint point;
        point.threshold = threshold;
        point.tpr = static_cast<double>(tp) / total_tracks;
        point.fpr = total_false > 0.0 ? static_cast<double>(fp) / total_false : 0.0;
        curve.points.push_back(point);
    }

    // Step integration (no trapezoids), truncated at fpr_max. Beyond the
    // last operating point the curve extends flat: a threshold below every
    // score admits everything, so TPR stays at its final value.
    double auc = 0.0;
    double prev_fpr = 0.0;
    double prev_tpr = 0.0;
    for (const RocPoint& point : curve.points) {
        auc += (std::min(point.fpr, fpr_max) - std::min(prev_fpr, fpr_max)) * prev_tpr;
        prev_fpr = point.fpr;
        prev_tpr = point.tpr;
    }
    auc += (fpr_max - std::min(prev_fpr, fpr_max)) * prev_tpr;
    curve.auc = std::clamp(auc, 0.0, fpr_max);
    return curve;
}

ConfusionMatrix confusion_matrix(std::span<const std::pair<std::string, std::string>> video_labels,
                                 std::span<const std::string> vocabulary) {
    if (video_labels.empty()) {
        throw InvalidInputError("confusion_matrix: no videos");
    }
    ConfusionMatrix matrix;
    matrix.labels.assign(vocabulary.begin(), vocabulary.end());
    matrix.counts.assign(vocabulary.size() * vocabulary.size(), 0);
    std::size_t correct = 0;
    for (const auto& [truth, predicted] : video_labels) {
        const std::size_t t = vocab_index(vocabulary, truth, "true label");
        const std::size_t p = vocab_index(vocabulary, predicted, "predicted label");
        ++matrix.counts[t * vocabulary.size() + p];
        if (t == p) ++correct;
    }
    matrix.total = video_labels.size();
    matrix.accuracy = static_cast<double>(correct) / static_cast<double>(matrix.total);
    return matrix;
}

}  // namespace tubekit

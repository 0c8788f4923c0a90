#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tubekit/geometry.hpp"
#include "tubekit/linker.hpp"
#include "tubekit/records.hpp"

namespace tubekit {

// A per-frame classified box with a confidence score.
struct Detection {
    std::string video_id;
    int frame = 0;
    Box box;
    std::string action;
    double score = 0.0;
};

struct PRPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

struct PRCurve {
    std::vector<PRPoint> points;  // thresholds descending; ties enter together
    double ap = 0.0;              // area under the precision envelope
};

struct ClassAP {
    std::string action;
    bool defined = false;  // false when the class has no ground truth anywhere
    double ap = 0.0;
    std::size_t gt_count = 0;
    PRCurve curve;
};

struct APReport {
    std::vector<ClassAP> per_class;  // vocabulary order
    double mean_ap = 0.0;            // unweighted mean over defined classes
    std::size_t defined_classes = 0;
};

// Detection AP per class: detections sorted by score match greedily against
// unmatched same-frame ground-truth boxes of their class; a match counts
// when IoU exceeds sigma strictly. Duplicates and sub-threshold matches are
// false positives.
APReport frame_ap(std::span<const Detection> detections, std::span<const GroundTruthTrack> groundtruth,
                  std::span<const std::string> vocabulary, double sigma);

// Tube AP per class: same machinery with the overlap replaced by the mean
// per-frame IoU against same-video tracks, each track matchable once.
APReport video_ap(std::span<const ActionTube> tubes, std::span<const GroundTruthTrack> groundtruth,
                  std::span<const std::string> vocabulary, double sigma);

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;
    double auc = 0.0;  // step integral of TPR over FPR in [0, fpr_max]
    std::size_t retained_tubes = 0;
    std::size_t false_tubes = 0;
};

// Detection ROC over tubes: keeps the top-k tubes per (class, video),
// matches them like video_ap, and sweeps the score threshold. The false
// positive rate is measured against the retained non-matching tubes, and
// the curve is truncated at fpr_max, so the best attainable AUC is fpr_max.
RocCurve roc_auc(std::span<const ActionTube> tubes, std::span<const GroundTruthTrack> groundtruth,
                 double sigma, double fpr_max = 0.6, int topk = 3);

struct ConfusionMatrix {
    std::vector<std::string> labels;  // vocabulary order
    std::vector<std::size_t> counts;  // |A|x|A|, row-major, row = true class
    std::size_t total = 0;
    double accuracy = 0.0;

    std::size_t at(std::size_t true_idx, std::size_t predicted_idx) const {
        return counts[true_idx * labels.size() + predicted_idx];
    }
};

// One (true, predicted) label pair per video.
ConfusionMatrix confusion_matrix(std::span<const std::pair<std::string, std::string>> video_labels,
                                 std::span<const std::string> vocabulary);

}  // namespace tubekit

#pragma once

#include <optional>
#include <vector>

#include "vsum/pipeline_types.hpp"

namespace vsum {

struct GroundTruthClip {
    int f_start = 0;
    int f_end = 0;
    BoundingBox b_start;
    BoundingBox b_end;
};

struct PredictedClip {
    int f_start = 0;
    int f_end = 0;
    BoundingBox b_start;
    BoundingBox b_end;
    double score = 0.0; // in [0,1]
};

// ap/auc are absent when undefined (no positives, or a single class).
struct EvalReport {
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    std::optional<double> ap;
    std::optional<double> auc;
    int tp = 0;
    int fp = 0;
    int fn = 0;
};

// Inclusive integer ranges: |intersection| / |union| counted in frames.
double temporal_iou(int a_start, int a_end, int b_start, int b_end);

// Standard rectangle intersection-over-union on real-valued boxes.
double box_iou(const BoundingBox& a, const BoundingBox& b);

// Mean of the start-pair and end-pair box IoUs.
double spatial_iou(const BoundingBox& p_start, const BoundingBox& p_end, const BoundingBox& g_start,
                   const BoundingBox& g_end);

struct MatchResult {
    std::vector<bool> is_tp;     // per prediction, in input order
    std::vector<int> matched_gt; // GT index per prediction, -1 when FP
    std::vector<bool> gt_matched;
};

// Predictions in descending score order (ties keep input order) are each
// matched one-to-one to the unmatched ground-truth clip maximizing
// (IOU_tem + IOU_spa)/2 among those with both IoUs strictly above phi.
MatchResult match_clips(const std::vector<PredictedClip>& preds,
                        const std::vector<GroundTruthClip>& gts, double phi = 0.1);

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
    int tp = 0;
    int fp = 0;
    int fn = 0;
};

// Binarizes predictions at tau (score >= tau counts as selected) and applies
// the set definitions, with 0-denominator conventions: no selected
// predictions -> precision 0; no ground truth -> recall 0; P = R = 0 -> F 0.
Prf precision_recall_f(const std::vector<PredictedClip>& preds, const MatchResult& match,
                       int gt_count, double tau = 0.5);

struct ScoredLabel {
    double score = 0.0;
    bool positive = false;
};

// Non-interpolated AP: mean over positives of precision at each positive's
// rank, ranking by descending score with stable ties. Throws when there is no
// positive.
double average_precision(const std::vector<ScoredLabel>& labels);

// Tie-aware Mann-Whitney statistic: the fraction of (positive, negative)
// pairs ranked correctly, ties counting one half. Throws unless both classes
// are present.
double roc_auc(const std::vector<ScoredLabel>& labels);

struct FrameMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double fpr = 0.0;
    double f = 0.0;
};

// Frame-level metrics: binarize scores at tau against 0/1 frame labels.
FrameMetrics frame_metrics(const std::vector<double>& scores, const std::vector<int>& labels,
                           double tau = 0.5);

// The clip-level protocol in one call: match at phi, P/R/F at tau, AP and AUC
// over the match labels (positives are the TP-matched predictions).
EvalReport evaluate_clips(const std::vector<PredictedClip>& preds,
                          const std::vector<GroundTruthClip>& gts, double phi = 0.1,
                          double tau = 0.5);

} // namespace vsum

#include "vsum/eval.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace vsum {

namespace {

std::vector<std::size_t> order_by_score_desc(std::size_t n, auto&& score_of) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return score_of(a) > score_of(b); });
    return order;
}

} // namespace

double temporal_iou(int a_start, int a_end, int b_start, int b_end) {
    if (a_start > a_end || b_start > b_end)
        throw std::invalid_argument("temporal_iou: invalid inclusive range");
    const int inter_lo = std::max(a_start, b_start);
    const int inter_hi = std::min(a_end, b_end);
    const int inter = std::max(0, inter_hi - inter_lo + 1);
    const int len_a = a_end - a_start + 1;
    const int len_b = b_end - b_start + 1;
    const int uni = len_a + len_b - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double box_iou(const BoundingBox& a, const BoundingBox& b) {
    if (a.w <= 0 || a.h <= 0 || b.w <= 0 || b.h <= 0)
        throw std::invalid_argument("box_iou: boxes must have positive extent");
    const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = ix * iy;
    const double uni = a.w * a.h + b.w * b.h - inter;
    return inter / uni;
}

double spatial_iou(const BoundingBox& p_start, const BoundingBox& p_end, const BoundingBox& g_start,
                   const BoundingBox& g_end) {
    return 0.5 * (box_iou(p_start, g_start) + box_iou(p_end, g_end));
}

MatchResult match_clips(const std::vector<PredictedClip>& preds,
                        const std::vector<GroundTruthClip>& gts, double phi) {
    if (phi <= 0.0 || phi >= 1.0) throw std::invalid_argument("match_clips: phi must lie in (0,1)");
    MatchResult res;
    res.is_tp.assign(preds.size(), false);
    res.matched_gt.assign(preds.size(), -1);
    res.gt_matched.assign(gts.size(), false);

    const auto order = order_by_score_desc(preds.size(), [&](std::size_t k) { return preds[k].score; });
    for (std::size_t k : order) {
        const PredictedClip& p = preds[k];
        double best = -1.0;
        int best_g = -1;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (res.gt_matched[g]) continue;
            const GroundTruthClip& gt = gts[g];
            const double t_iou = temporal_iou(p.f_start, p.f_end, gt.f_start, gt.f_end);
            if (t_iou <= phi) continue;
            const double s_iou = spatial_iou(p.b_start, p.b_end, gt.b_start, gt.b_end);
            if (s_iou <= phi) continue;
            const double combined = 0.5 * (t_iou + s_iou);
            if (combined > best) {
                best = combined;
                best_g = static_cast<int>(g);
            }
        }
        if (best_g >= 0) {
            res.is_tp[k] = true;
            res.matched_gt[k] = best_g;
            res.gt_matched[static_cast<std::size_t>(best_g)] = true;
        }
    }
    return res;
}

Prf precision_recall_f(const std::vector<PredictedClip>& preds, const MatchResult& match,
                       int gt_count, double tau) {
    if (match.is_tp.size() != preds.size())
        throw std::invalid_argument("precision_recall_f: match labels do not cover predictions");
    if (gt_count < 0) throw std::invalid_argument("precision_recall_f: gt_count must be >= 0");
    int selected = 0;
    int tp = 0;
    for (std::size_t k = 0; k < preds.size(); ++k) {
        if (preds[k].score < tau) continue;
        ++selected;
        if (match.is_tp[k]) ++tp;
    }
    Prf out;
    out.tp = tp;
    out.fp = selected - tp;
    out.fn = gt_count - tp;
    out.precision = selected > 0 ? static_cast<double>(tp) / selected : 0.0;
    out.recall = gt_count > 0 ? static_cast<double>(tp) / gt_count : 0.0;
    out.f = (out.precision + out.recall) > 0.0
                ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                : 0.0;
    return out;
}

double average_precision(const std::vector<ScoredLabel>& labels) {
    const auto order = order_by_score_desc(labels.size(), [&](std::size_t k) { return labels[k].score; });
    int positives = 0;
    int seen = 0;
    double acc = 0.0;
    for (std::size_t k : order) {
        ++seen;
        if (labels[k].positive) {
            ++positives;
            acc += static_cast<double>(positives) / static_cast<double>(seen);
        }
    }
    if (positives == 0) throw std::invalid_argument("average_precision: undefined without positives");
    return acc / static_cast<double>(positives);
}

double roc_auc(const std::vector<ScoredLabel>& labels) {
    std::size_t n_pos = 0;
    for (const ScoredLabel& l : labels) n_pos += l.positive ? 1 : 0;
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("roc_auc: needs at least one positive and one negative");

    // Midrank sum of the positives, ascending score order.
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return labels[a].score < labels[b].score; });
    double rank_sum = 0.0;
    std::size_t k = 0;
    while (k < order.size()) {
        std::size_t j = k;
        while (j + 1 < order.size() && labels[order[j + 1]].score == labels[order[k]].score) ++j;
        const double midrank = 0.5 * static_cast<double>(k + 1 + j + 1);
        for (std::size_t i = k; i <= j; ++i)
            if (labels[order[i]].positive) rank_sum += midrank;
        k = j + 1;
    }
    const double n_pos_d = static_cast<double>(n_pos);
    return (rank_sum - n_pos_d * (n_pos_d + 1.0) / 2.0) / (n_pos_d * static_cast<double>(n_neg));
}

FrameMetrics frame_metrics(const std::vector<double>& scores, const std::vector<int>& labels,
                           double tau) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("frame_metrics: scores and labels lengths differ");
    std::size_t selected = 0, gt_pos = 0, gt_neg = 0, tp = 0, fp = 0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
        const bool pred = scores[k] >= tau;
        const bool truth = labels[k] != 0;
        selected += pred;
        gt_pos += truth;
        gt_neg += !truth;
        tp += pred && truth;
        fp += pred && !truth;
    }
    FrameMetrics out;
    out.precision = selected > 0 ? static_cast<double>(tp) / static_cast<double>(selected) : 0.0;
    out.recall = gt_pos > 0 ? static_cast<double>(tp) / static_cast<double>(gt_pos) : 0.0;
    out.fpr = gt_neg > 0 ? static_cast<double>(fp) / static_cast<double>(gt_neg) : 0.0;
    out.f = (out.precision + out.recall) > 0.0
                ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                : 0.0;
    return out;
}

EvalReport evaluate_clips(const std::vector<PredictedClip>& preds,
                          const std::vector<GroundTruthClip>& gts, double phi, double tau) {
    const MatchResult match = match_clips(preds, gts, phi);
    const Prf prf = precision_recall_f(preds, match, static_cast<int>(gts.size()), tau);
    EvalReport report;
    report.precision = prf.precision;
    report.recall = prf.recall;
    report.f_measure = prf.f;
    report.tp = prf.tp;
    report.fp = prf.fp;
    report.fn = prf.fn;

    std::vector<ScoredLabel> labels;
    labels.reserve(preds.size());
    for (std::size_t k = 0; k < preds.size(); ++k) labels.push_back({preds[k].score, match.is_tp[k]});
    try {
        report.ap = average_precision(labels);
    } catch (const std::invalid_argument&) {
        report.ap.reset();
    }
    try {
        report.auc = roc_auc(labels);
    } catch (const std::invalid_argument&) {
        report.auc.reset();
    }
    return report;
}

} // namespace vsum

#include "vsum/segment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vsum {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// Prominence of a local minimum: walk outward until a strictly lower sample
// (or the array edge), track the highest sample seen on each side, and take
// the smaller of the two rises.
double min_prominence(const std::vector<double>& p, std::size_t t) {
    double left_high = p[t];
    for (std::size_t i = t; i-- > 0;) {
        if (p[i] < p[t]) break;
        left_high = std::max(left_high, p[i]);
    }
    double right_high = p[t];
    for (std::size_t i = t + 1; i < p.size(); ++i) {
        if (p[i] < p[t]) break;
        right_high = std::max(right_high, p[i]);
    }
    return std::min(left_high, right_high) - p[t];
}

// Splits [lo, hi] into ceil(len/max_len) near-equal pieces.
void split_range(int lo, int hi, int max_len, std::vector<std::pair<int, int>>& out) {
    const int len = hi - lo + 1;
    if (len <= max_len) {
        out.emplace_back(lo, hi);
        return;
    }
    const int pieces = (len + max_len - 1) / max_len;
    const int base = len / pieces;
    const int extra = len % pieces;
    int cur = lo;
    for (int k = 0; k < pieces; ++k) {
        const int piece_len = base + (k < extra ? 1 : 0);
        out.emplace_back(cur, cur + piece_len - 1);
        cur += piece_len;
    }
}

} // namespace

void SegmentConfig::validate() const {
    require(smooth_window >= 1 && smooth_window % 2 == 1, "smooth_window must be odd and >= 1");
    require(min_len >= 1 && min_len <= max_len, "need 1 <= min_len <= max_len");
    require(boundary_threshold >= 0.0 && boundary_threshold <= 1.0,
            "boundary_threshold must lie in [0,1]");
}

std::vector<double> motion_profile(const Trajectory& traj, int smooth_window) {
    require(smooth_window >= 1 && smooth_window % 2 == 1, "smooth_window must be odd and >= 1");
    require(!traj.boxes.empty(), "trajectory must cover at least one frame");
    const std::size_t n = traj.boxes.size();
    std::vector<double> raw(n, 0.0);
    for (std::size_t t = 1; t < n; ++t) {
        const BoundingBox& a = traj.boxes[t - 1];
        const BoundingBox& b = traj.boxes[t];
        const double dx = (b.x + b.w / 2.0) - (a.x + a.w / 2.0);
        const double dy = (b.y + b.h / 2.0) - (a.y + a.h / 2.0);
        raw[t] = std::hypot(dx, dy) / std::sqrt(b.w * b.h);
    }
    if (smooth_window == 1) return raw;
    const int radius = smooth_window / 2;
    std::vector<double> smooth(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t lo = t >= static_cast<std::size_t>(radius) ? t - radius : 0;
        const std::size_t hi = std::min(n - 1, t + radius);
        double acc = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) acc += raw[k];
        smooth[t] = acc / static_cast<double>(hi - lo + 1);
    }
    return smooth;
}

std::vector<std::pair<int, int>> segment_trajectory(const std::vector<double>& profile,
                                                    const SegmentConfig& cfg) {
    cfg.validate();
    require(!profile.empty(), "profile must be nonempty");
    const int n = static_cast<int>(profile.size());
    if (n <= cfg.min_len) return {{0, n - 1}};

    const auto [min_it, max_it] = std::minmax_element(profile.begin(), profile.end());
    const double prominence_floor = cfg.boundary_threshold * (*max_it - *min_it);

    std::vector<int> cuts;
    for (int t = 1; t + 1 < n; ++t) {
        const bool is_min = profile[t] <= profile[t - 1] && profile[t] <= profile[t + 1] &&
                            (profile[t] < profile[t - 1] || profile[t] < profile[t + 1]);
        if (!is_min) continue;
        if (min_prominence(profile, static_cast<std::size_t>(t)) >= prominence_floor) cuts.push_back(t);
    }

    std::vector<std::pair<int, int>> ranges;
    int prev = 0;
    for (int cut : cuts) {
        if (cut > prev) {
            ranges.emplace_back(prev, cut - 1);
            prev = cut;
        }
    }
    ranges.emplace_back(prev, n - 1);

    // Enforce the length bounds: split over-long ranges, merge under-short
    // ones into the shorter neighbor (left on ties), then split again in case
    // a merge overshot max_len.
    auto split_all = [&cfg](std::vector<std::pair<int, int>>& rs) {
        std::vector<std::pair<int, int>> split;
        for (const auto& [lo, hi] : rs) split_range(lo, hi, cfg.max_len, split);
        rs = std::move(split);
    };
    auto merge_short = [&cfg](std::vector<std::pair<int, int>>& rs) {
        bool merged = true;
        while (merged && rs.size() > 1) {
            merged = false;
            for (std::size_t k = 0; k < rs.size(); ++k) {
                const int len = rs[k].second - rs[k].first + 1;
                if (len >= cfg.min_len) continue;
                std::size_t target;
                if (k == 0) {
                    target = 1;
                } else if (k + 1 == rs.size()) {
                    target = k - 1;
                } else {
                    const int left_len = rs[k - 1].second - rs[k - 1].first + 1;
                    const int right_len = rs[k + 1].second - rs[k + 1].first + 1;
                    target = left_len <= right_len ? k - 1 : k + 1;
                }
                const std::size_t lo_idx = std::min(k, target);
                const std::size_t hi_idx = std::max(k, target);
                rs[lo_idx] = {rs[lo_idx].first, rs[hi_idx].second};
                rs.erase(rs.begin() + static_cast<std::ptrdiff_t>(hi_idx));
                merged = true;
                break;
            }
        }
    };
    split_all(ranges);
    merge_short(ranges);
    split_all(ranges);
    return ranges;
}

} // namespace vsum

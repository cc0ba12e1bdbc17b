#pragma once

#include <utility>
#include <vector>

#include "vsum/pipeline_types.hpp"

namespace vsum {

struct SegmentConfig {
    int smooth_window = 5; // odd, >= 1
    int min_len = 5;
    int max_len = 60;
    double boundary_threshold = 0.2; // relative prominence in [0,1]

    void validate() const;
};

// Per-frame motion magnitude: displacement of the box center from the previous
// frame, scaled by 1/sqrt(w*h) of the current box (frame 0 gets 0), then a
// centered moving average with the given odd window, truncated at the edges.
std::vector<double> motion_profile(const Trajectory& traj, int smooth_window);

// Cuts at local minima of the profile whose prominence clears
// boundary_threshold * (max - min); over-long ranges are split uniformly and
// under-short ranges merged into the shorter neighbor. Returned ranges are
// inclusive, local to the profile, and partition [0, profile.size()).
std::vector<std::pair<int, int>> segment_trajectory(const std::vector<double>& profile,
                                                    const SegmentConfig& cfg);

} // namespace vsum

#pragma once

#include <array>
#include <utility>
#include <vector>

#include "vsum/pipeline_types.hpp"
#include "vsum/segment.hpp"
#include "vsum/stack.hpp"

namespace vsum {

// Frame indices sampled from an inclusive clip range: start, floor-midpoint,
// end.
std::array<int, 3> sample_regions(int f_start, int f_end);

// Cuts the clip [f_start, f_end] (absolute frames) out of a trajectory,
// sampling features at the three region frames.
MotionClip build_clip(const Trajectory& traj, int f_start, int f_end);

// One length-`copies` constant sequence per input feature vector; the still
// object sequences used for offline training.
SequenceBatch make_still_sequences(const std::vector<Vec>& box_features, int copies = 3);

// Walks the frames in order and collects the feature vectors of the boxes
// alive at each frame, seeded-subsampling down to max_per_frame when a frame
// offers more.
std::vector<Vec> harvest_frame_features(const std::vector<Trajectory>& trajectories,
                                        int total_frames, std::size_t max_per_frame,
                                        std::uint64_t seed);

// Half-open partition [0,chunk), [chunk,2*chunk), ... with a final partial
// chunk.
std::vector<std::pair<int, int>> chunk_stream(int total_frames, int chunk_size = 1000);

// Min-max normalization to [0,1]; all zeros when max == min.
std::vector<double> normalize_scores(const std::vector<double>& raw_errors);

// Frame score = mean of the scores of clips covering the frame, 0 where no
// clip does.
std::vector<double> frame_level_scores(const std::vector<ClipScore>& clips, int total_frames);

// Segments every trajectory into motion clips.
std::vector<MotionClip> extract_clips(const std::vector<Trajectory>& trajectories,
                                      const SegmentConfig& seg);

struct StreamResult {
    std::vector<ClipScore> clips; // normalized scores, one record per clip
    StackedModel model;           // state after the final chunk's update
};

// The online loop: for each chunk in order, score the clips whose midpoint
// falls inside it with the current model, then update the model on those same
// clips. Scores are min-max normalized over the whole video at the end.
StreamResult summarize_stream(StackedModel model, const std::vector<Trajectory>& trajectories,
                              int total_frames, const SegmentConfig& seg, int chunk_size = 1000);

} // namespace vsum

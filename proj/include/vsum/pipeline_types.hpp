#pragma once

#include <string>
#include <vector>

#include "vsum/model.hpp"

namespace vsum {

struct BoundingBox {
    double x = 0.0; // top-left
    double y = 0.0;
    double w = 0.0; // must be > 0
    double h = 0.0; // must be > 0
};

// One tracked object: a contiguous inclusive frame range with a box and a
// feature vector per frame. Feature vectors use the two-block layout
// (appearance half, then context half). `regime` is an optional annotation
// emitted by the synthetic generator; the pipeline ignores it.
struct Trajectory {
    int object_id = 0;
    int f_start = 0;
    int f_end = 0;
    std::vector<BoundingBox> boxes;
    std::vector<Vec> features;
    std::string regime;

    int length() const { return f_end - f_start + 1; }
};

// A temporally contiguous piece of one trajectory with features sampled at
// its start, middle, and end frames.
struct MotionClip {
    int object_id = 0;
    int f_start = 0;
    int f_end = 0;
    BoundingBox b_start;
    BoundingBox b_end;
    Sequence sampled_features; // exactly 3 vectors
};

struct ClipScore {
    MotionClip clip;
    double raw_error = 0.0; // >= 0
    double score = 0.0;     // min-max normalized over the video, in [0,1]
};

} // namespace vsum

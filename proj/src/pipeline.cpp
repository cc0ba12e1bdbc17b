#include "vsum/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

namespace vsum {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace

std::array<int, 3> sample_regions(int f_start, int f_end) {
    require(f_start <= f_end, "sample_regions: f_start must be <= f_end");
    return {f_start, (f_start + f_end) / 2, f_end};
}

MotionClip build_clip(const Trajectory& traj, int f_start, int f_end) {
    require(f_start <= f_end, "build_clip: empty range");
    require(f_start >= traj.f_start && f_end <= traj.f_end,
            "build_clip: range outside the trajectory");
    MotionClip clip;
    clip.object_id = traj.object_id;
    clip.f_start = f_start;
    clip.f_end = f_end;
    clip.b_start = traj.boxes[static_cast<std::size_t>(f_start - traj.f_start)];
    clip.b_end = traj.boxes[static_cast<std::size_t>(f_end - traj.f_start)];
    for (int frame : sample_regions(f_start, f_end))
        clip.sampled_features.push_back(traj.features[static_cast<std::size_t>(frame - traj.f_start)]);
    return clip;
}

SequenceBatch make_still_sequences(const std::vector<Vec>& box_features, int copies) {
    require(!box_features.empty(), "make_still_sequences: empty input");
    require(copies >= 1, "make_still_sequences: copies must be >= 1");
    SequenceBatch out;
    out.reserve(box_features.size());
    for (const Vec& v : box_features) out.emplace_back(static_cast<std::size_t>(copies), v);
    return out;
}

std::vector<Vec> harvest_frame_features(const std::vector<Trajectory>& trajectories,
                                        int total_frames, std::size_t max_per_frame,
                                        std::uint64_t seed) {
    require(max_per_frame >= 1, "harvest_frame_features: max_per_frame must be >= 1");
    Rng rng(Rng::mix(seed, 0x626F786573ULL));
    std::vector<Vec> harvest;
    for (int frame = 0; frame < total_frames; ++frame) {
        std::vector<Vec> feats;
        for (const Trajectory& t : trajectories) {
            if (frame < t.f_start || frame > t.f_end) continue;
            feats.push_back(t.features[static_cast<std::size_t>(frame - t.f_start)]);
        }
        if (feats.size() > max_per_frame) {
            rng.shuffle(feats);
            feats.resize(max_per_frame);
        }
        for (Vec& f : feats) harvest.push_back(std::move(f));
    }
    return harvest;
}

std::vector<std::pair<int, int>> chunk_stream(int total_frames, int chunk_size) {
    require(total_frames >= 1, "chunk_stream: total_frames must be >= 1");
    require(chunk_size >= 1, "chunk_stream: chunk_size must be >= 1");
    std::vector<std::pair<int, int>> chunks;
    for (int lo = 0; lo < total_frames; lo += chunk_size)
        chunks.emplace_back(lo, std::min(total_frames, lo + chunk_size));
    return chunks;
}

std::vector<double> normalize_scores(const std::vector<double>& raw_errors) {
    require(!raw_errors.empty(), "normalize_scores: empty input");
    const auto [min_it, max_it] = std::minmax_element(raw_errors.begin(), raw_errors.end());
    const double lo = *min_it;
    const double range = *max_it - lo;
    std::vector<double> scores(raw_errors.size(), 0.0);
    if (range == 0.0) return scores;
    for (std::size_t k = 0; k < raw_errors.size(); ++k) scores[k] = (raw_errors[k] - lo) / range;
    return scores;
}

std::vector<double> frame_level_scores(const std::vector<ClipScore>& clips, int total_frames) {
    std::vector<double> sum(static_cast<std::size_t>(total_frames), 0.0);
    std::vector<int> count(static_cast<std::size_t>(total_frames), 0);
    for (const ClipScore& cs : clips) {
        require(cs.clip.f_start >= 0 && cs.clip.f_end < total_frames,
                "frame_level_scores: clip range outside [0, total_frames)");
        for (int f = cs.clip.f_start; f <= cs.clip.f_end; ++f) {
            sum[static_cast<std::size_t>(f)] += cs.score;
            count[static_cast<std::size_t>(f)] += 1;
        }
    }
    for (std::size_t f = 0; f < sum.size(); ++f)
        if (count[f] > 0) sum[f] /= static_cast<double>(count[f]);
    return sum;
}

std::vector<MotionClip> extract_clips(const std::vector<Trajectory>& trajectories,
                                      const SegmentConfig& seg) {
    std::vector<MotionClip> clips;
    for (const Trajectory& traj : trajectories) {
        const std::vector<double> profile = motion_profile(traj, seg.smooth_window);
        for (const auto& [lo, hi] : segment_trajectory(profile, seg))
            clips.push_back(build_clip(traj, traj.f_start + lo, traj.f_start + hi));
    }
    return clips;
}

StreamResult summarize_stream(StackedModel model, const std::vector<Trajectory>& trajectories,
                              int total_frames, const SegmentConfig& seg, int chunk_size) {
    require(total_frames >= 1, "summarize_stream: total_frames must be >= 1");
    const std::vector<MotionClip> clips = extract_clips(trajectories, seg);

    StreamResult result;
    result.clips.reserve(clips.size());
    for (const MotionClip& clip : clips) {
        require(clip.f_start >= 0 && clip.f_end < total_frames,
                "summarize_stream: clip outside the stream");
        result.clips.push_back({clip, 0.0, 0.0});
    }

    // Each clip belongs to the chunk containing its midpoint frame.
    for (const auto& [lo, hi] : chunk_stream(total_frames, chunk_size)) {
        std::vector<std::size_t> members;
        for (std::size_t k = 0; k < clips.size(); ++k) {
            const int mid = (clips[k].f_start + clips[k].f_end) / 2;
            if (mid >= lo && mid < hi) members.push_back(k);
        }
        if (members.empty()) continue;
        SequenceBatch batch;
        batch.reserve(members.size());
        for (std::size_t k : members) batch.push_back(clips[k].sampled_features);
        const std::vector<double> errors = score_batch(model, batch);
        for (std::size_t j = 0; j < members.size(); ++j) result.clips[members[j]].raw_error = errors[j];
        model = online_update(std::move(model), batch);
    }

    if (!result.clips.empty()) {
        std::vector<double> raw;
        raw.reserve(result.clips.size());
        for (const ClipScore& cs : result.clips) raw.push_back(cs.raw_error);
        const std::vector<double> norm = normalize_scores(raw);
        for (std::size_t k = 0; k < norm.size(); ++k) result.clips[k].score = norm[k];
    }
    result.model = std::move(model);
    return result;
}

} // namespace vsum

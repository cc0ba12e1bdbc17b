#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vsum/eval.hpp"
#include "vsum/pipeline.hpp"
#include "vsum/stack.hpp"
#include "vsum/synth.hpp"

namespace vsum {

struct DatasetFile {
    int feature_dim = 0;
    int total_frames = 0;
    std::optional<double> fps;
    std::vector<Trajectory> trajectories;
    std::vector<GroundTruthClip> ground_truth;

    void validate() const;
};

struct ScoreFile {
    int total_frames = 0;
    std::vector<ClipScore> clips;
    std::vector<double> frame_scores;
};

// Everything a run needs, mirrored field-by-field in the JSON config file.
struct RunConfig {
    StackConfig stack;
    SegmentConfig segment;
    SynthConfig synth;
    int chunk_size = 1000;
};

std::string encode_base64(const std::uint8_t* data, std::size_t len);
std::vector<std::uint8_t> decode_base64(const std::string& text);

// Serialized forms; file writers wrap these with an atomic temp-file rename
// so failures never leave partial output behind.
std::string dataset_to_json(const DatasetFile& ds);
DatasetFile dataset_from_json(const std::string& text);

// Checkpoints embed every tensor as base64 little-endian doubles, so
// load(save(m)) round-trips bitwise.
std::string checkpoint_to_json(const StackedModel& model);
StackedModel checkpoint_from_json(const std::string& text);

std::string scores_to_json(const ScoreFile& scores);
ScoreFile scores_from_json(const std::string& text);

std::string report_to_json(const EvalReport& report);

// Reads a JSON config and overlays the fields present onto defaults; unknown
// keys are an error naming the key.
RunConfig run_config_from_json(const std::string& text, RunConfig base = {});

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& content);

DatasetFile load_dataset(const std::string& path);
void save_dataset(const std::string& path, const DatasetFile& ds);
StackedModel load_checkpoint(const std::string& path);
void save_checkpoint(const std::string& path, const StackedModel& model);
ScoreFile load_scores(const std::string& path);
void save_scores(const std::string& path, const ScoreFile& scores);
RunConfig load_run_config(const std::string& path, RunConfig base = {});

} // namespace vsum

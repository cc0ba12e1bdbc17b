#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vsum/gradcheck.hpp"
#include "vsum/io.hpp"

namespace {

using namespace vsum;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
};

RunConfig resolve_config(const CommonArgs& args) {
    RunConfig cfg;
    if (!args.config_path.empty()) cfg = load_run_config(args.config_path, cfg);
    if (args.seed) {
        cfg.stack.seed = *args.seed;
        cfg.synth.seed = *args.seed;
    }
    return cfg;
}

// Up to 30 still sequences per frame, drawn from the boxes alive there.
SequenceBatch harvest_still_sequences(const DatasetFile& ds, const StackConfig& stack) {
    const std::vector<Vec> feats =
        harvest_frame_features(ds.trajectories, ds.total_frames, 30, stack.seed);
    if (feats.empty()) return {};
    return make_still_sequences(feats, stack.seq_len);
}

int cmd_synth(const CommonArgs& common, const std::string& out_path) {
    const RunConfig cfg = resolve_config(common);
    const DatasetFile ds = synthesize(cfg.synth);
    save_dataset(out_path, ds);
    std::cout << "wrote " << out_path << ": " << ds.trajectories.size() << " trajectories, "
              << ds.ground_truth.size() << " ground-truth clips, " << ds.total_frames
              << " frames\n";
    return 0;
}

int cmd_train(const CommonArgs& common, const std::string& data_path, const std::string& out_path) {
    RunConfig cfg = resolve_config(common);
    const DatasetFile ds = load_dataset(data_path);
    if (cfg.stack.input_dim != ds.feature_dim)
        throw std::runtime_error("config.input_dim (" + std::to_string(cfg.stack.input_dim) +
                                 ") does not match dataset feature_dim (" +
                                 std::to_string(ds.feature_dim) + ")");
    const SequenceBatch stills = harvest_still_sequences(ds, cfg.stack);
    if (stills.empty()) throw std::runtime_error("dataset has no boxes to train on");
    std::cout << "training on " << stills.size() << " still sequences\n";
    StackedModel model = init_stack(cfg.stack);
    model = greedy_train(std::move(model), stills, [](const EpochStat& s) {
        std::printf("layer %d epoch %3d  recon %.6f  penalty %.6f\n", s.layer, s.epoch,
                    s.recon_mean, s.penalty);
    });
    save_checkpoint(out_path, model);
    std::cout << "wrote checkpoint " << out_path << "\n";
    return 0;
}

int cmd_summarize(const CommonArgs& common, const std::string& data_path,
                  const std::string& model_path, const std::string& out_path) {
    const RunConfig cfg = resolve_config(common);
    const DatasetFile ds = load_dataset(data_path);
    StackedModel model = load_checkpoint(model_path);
    if (model.config.input_dim != ds.feature_dim)
        throw std::runtime_error("checkpoint input_dim (" + std::to_string(model.config.input_dim) +
                                 ") does not match dataset feature_dim (" +
                                 std::to_string(ds.feature_dim) + ")");
    if (model.config.seq_len != 3)
        throw std::runtime_error("summarize requires seq_len 3 (start/middle/end region sampling)");

    const StreamResult result =
        summarize_stream(std::move(model), ds.trajectories, ds.total_frames, cfg.segment, cfg.chunk_size);
    ScoreFile scores;
    scores.total_frames = ds.total_frames;
    scores.clips = result.clips;
    scores.frame_scores = frame_level_scores(result.clips, ds.total_frames);
    save_scores(out_path, scores);
    std::cout << "wrote " << out_path << ": " << scores.clips.size() << " clip scores\n";
    return 0;
}

int cmd_eval(const std::string& scores_path, const std::string& data_path,
             const std::string& out_path) {
    const ScoreFile scores = load_scores(scores_path);
    const DatasetFile ds = load_dataset(data_path);
    std::vector<PredictedClip> preds;
    preds.reserve(scores.clips.size());
    for (const ClipScore& cs : scores.clips) {
        if (cs.clip.f_start < 0 || cs.clip.f_end >= ds.total_frames)
            throw std::runtime_error("score record frame range outside the dataset");
        preds.push_back({cs.clip.f_start, cs.clip.f_end, cs.clip.b_start, cs.clip.b_end, cs.score});
    }
    const EvalReport report = evaluate_clips(preds, ds.ground_truth);
    if (!report.ap)
        std::cerr << "warning: no true-positive predictions; AP is undefined and reported as null\n";
    const std::string text = report_to_json(report);
    std::cout << text << "\n";
    if (!out_path.empty()) write_file_atomic(out_path, text);
    return 0;
}

int cmd_gradcheck(const CommonArgs& common, const std::string& out_path) {
    GradCheckConfig cfg;
    if (common.seed) cfg.seed = *common.seed;
    const GradCheckReport report = run_gradcheck(cfg);
    const std::string text = format_gradcheck_report(report);
    std::cout << text;
    if (!out_path.empty()) write_file_atomic(out_path, text);
    return report.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Object-level video summarization by online reconstruction-error scoring"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string data_path, model_path, scores_path, out_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "JSON config file");
        sub->add_option("--seed", common.seed, "overrides the config seed");
    };

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic benchmark dataset");
    add_common(synth);
    synth->add_option("--out", out_path, "output dataset path")->required();

    CLI::App* train = app.add_subcommand("train", "offline training on still object sequences");
    add_common(train);
    train->add_option("--data", data_path, "dataset path")->required();
    train->add_option("--out", out_path, "output checkpoint path")->required();

    CLI::App* summarize = app.add_subcommand("summarize", "score and update over the chunked stream");
    add_common(summarize);
    summarize->add_option("--data", data_path, "dataset path")->required();
    summarize->add_option("--model", model_path, "checkpoint path")->required();
    summarize->add_option("--out", out_path, "output score path")->required();

    CLI::App* eval = app.add_subcommand("eval", "match predictions to ground truth and report metrics");
    eval->add_option("--scores", scores_path, "score file path")->required();
    eval->add_option("--data", data_path, "dataset path")->required();
    eval->add_option("--out", out_path, "optional report output path");

    CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    add_common(gradcheck);
    gradcheck->add_option("--out", out_path, "optional report output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(common, out_path);
        if (train->parsed()) return cmd_train(common, data_path, out_path);
        if (summarize->parsed()) return cmd_summarize(common, data_path, model_path, out_path);
        if (eval->parsed()) return cmd_eval(scores_path, data_path, out_path);
        if (gradcheck->parsed()) return cmd_gradcheck(common, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

#include "vsum/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

using nlohmann::json;

namespace vsum {

namespace {

constexpr int kCheckpointVersion = 1;
constexpr char kBase64Table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::runtime_error(msg);
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& item : j.items())
        require(allowed.count(item.key()) > 0, where + ": unknown field '" + item.key() + "'");
}

json vec_to_json(const Vec& v) {
    const auto* raw = reinterpret_cast<const std::uint8_t*>(v.data());
    return {{"len", v.size()}, {"data", encode_base64(raw, sizeof(double) * static_cast<std::size_t>(v.size()))}};
}

Vec vec_from_json(const json& j) {
    const auto len = j.at("len").get<Eigen::Index>();
    const std::vector<std::uint8_t> bytes = decode_base64(j.at("data").get<std::string>());
    require(bytes.size() == sizeof(double) * static_cast<std::size_t>(len),
            "checkpoint: vector payload size does not match len");
    Vec v(len);
    std::memcpy(v.data(), bytes.data(), bytes.size());
    return v;
}

json mat_to_json(const Mat& m) {
    const auto* raw = reinterpret_cast<const std::uint8_t*>(m.data());
    return {{"rows", m.rows()},
            {"cols", m.cols()},
            {"data", encode_base64(raw, sizeof(double) * static_cast<std::size_t>(m.size()))}};
}

Mat mat_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const std::vector<std::uint8_t> bytes = decode_base64(j.at("data").get<std::string>());
    require(bytes.size() == sizeof(double) * static_cast<std::size_t>(rows * cols),
            "checkpoint: matrix payload size does not match shape");
    Mat m(rows, cols);
    std::memcpy(m.data(), bytes.data(), bytes.size());
    return m;
}

json lstm_to_json(const LstmParams& p) {
    return {{"w_ix", mat_to_json(p.w_ix)},   {"w_fx", mat_to_json(p.w_fx)},
            {"w_ox", mat_to_json(p.w_ox)},   {"w_cx", mat_to_json(p.w_cx)},
            {"phi_ih", mat_to_json(p.phi_ih)}, {"phi_fh", mat_to_json(p.phi_fh)},
            {"phi_oh", mat_to_json(p.phi_oh)}, {"phi_ch", mat_to_json(p.phi_ch)},
            {"b_i", vec_to_json(p.b_i)},     {"b_f", vec_to_json(p.b_f)},
            {"b_o", vec_to_json(p.b_o)},     {"b_c", vec_to_json(p.b_c)}};
}

LstmParams lstm_from_json(const json& j) {
    LstmParams p;
    p.w_ix = mat_from_json(j.at("w_ix"));
    p.w_fx = mat_from_json(j.at("w_fx"));
    p.w_ox = mat_from_json(j.at("w_ox"));
    p.w_cx = mat_from_json(j.at("w_cx"));
    p.phi_ih = mat_from_json(j.at("phi_ih"));
    p.phi_fh = mat_from_json(j.at("phi_fh"));
    p.phi_oh = mat_from_json(j.at("phi_oh"));
    p.phi_ch = mat_from_json(j.at("phi_ch"));
    p.b_i = vec_from_json(j.at("b_i"));
    p.b_f = vec_from_json(j.at("b_f"));
    p.b_o = vec_from_json(j.at("b_o"));
    p.b_c = vec_from_json(j.at("b_c"));
    return p;
}

json box_to_json(const BoundingBox& b) {
    return {{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}};
}

BoundingBox box_from_json(const json& j) {
    return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("w").get<double>(),
            j.at("h").get<double>()};
}

json stack_config_to_json(const StackConfig& c) {
    return {{"num_layers", c.num_layers},
            {"hidden_dims", c.hidden_dims},
            {"input_dim", c.input_dim},
            {"seq_len", c.seq_len},
            {"rho", c.rho},
            {"beta", c.beta},
            {"eps", c.eps},
            {"lr_offline", c.lr_offline},
            {"lr_online", c.lr_online},
            {"batch_offline", c.batch_offline},
            {"epochs_offline", c.epochs_offline},
            {"online_update_epochs", c.online_update_epochs},
            {"grad_clip", c.grad_clip},
            {"seed", c.seed}};
}

StackConfig stack_config_from_json(const json& j, StackConfig c) {
    if (j.contains("num_layers")) c.num_layers = j.at("num_layers").get<int>();
    if (j.contains("hidden_dims")) c.hidden_dims = j.at("hidden_dims").get<std::vector<int>>();
    if (j.contains("input_dim")) c.input_dim = j.at("input_dim").get<int>();
    if (j.contains("seq_len")) c.seq_len = j.at("seq_len").get<int>();
    if (j.contains("rho")) c.rho = j.at("rho").get<double>();
    if (j.contains("beta")) c.beta = j.at("beta").get<double>();
    if (j.contains("eps")) c.eps = j.at("eps").get<double>();
    if (j.contains("lr_offline")) c.lr_offline = j.at("lr_offline").get<double>();
    if (j.contains("lr_online")) c.lr_online = j.at("lr_online").get<double>();
    if (j.contains("batch_offline")) c.batch_offline = j.at("batch_offline").get<int>();
    if (j.contains("epochs_offline")) c.epochs_offline = j.at("epochs_offline").get<int>();
    if (j.contains("online_update_epochs"))
        c.online_update_epochs = j.at("online_update_epochs").get<int>();
    if (j.contains("grad_clip")) c.grad_clip = j.at("grad_clip").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

} // namespace

std::string encode_base64(const std::uint8_t* data, std::size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
        const std::uint32_t b0 = data[i];
        const std::uint32_t b1 = i + 1 < len ? data[i + 1] : 0;
        const std::uint32_t b2 = i + 2 < len ? data[i + 2] : 0;
        const std::uint32_t triple = (b0 << 16) | (b1 << 8) | b2;
        out.push_back(kBase64Table[(triple >> 18) & 0x3F]);
        out.push_back(kBase64Table[(triple >> 12) & 0x3F]);
        out.push_back(i + 1 < len ? kBase64Table[(triple >> 6) & 0x3F] : '=');
        out.push_back(i + 2 < len ? kBase64Table[triple & 0x3F] : '=');
    }
    return out;
}

std::vector<std::uint8_t> decode_base64(const std::string& text) {
    require(text.size() % 4 == 0, "base64: length must be a multiple of 4");
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int vals[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=') {
                require(i + 4 == text.size() && k >= 2, "base64: misplaced padding");
                vals[k] = 0;
                ++pad;
            } else {
                vals[k] = value_of(c);
                require(vals[k] >= 0, "base64: invalid character");
                require(pad == 0, "base64: data after padding");
            }
        }
        const std::uint32_t triple = (static_cast<std::uint32_t>(vals[0]) << 18) |
                                     (static_cast<std::uint32_t>(vals[1]) << 12) |
                                     (static_cast<std::uint32_t>(vals[2]) << 6) |
                                     static_cast<std::uint32_t>(vals[3]);
        out.push_back(static_cast<std::uint8_t>((triple >> 16) & 0xFF));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>((triple >> 8) & 0xFF));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(triple & 0xFF));
    }
    return out;
}

void DatasetFile::validate() const {
    require(feature_dim >= 1, "dataset: feature_dim must be >= 1");
    require(total_frames >= 1, "dataset: total_frames must be >= 1");
    for (const Trajectory& t : trajectories) {
        require(t.f_start >= 0 && t.f_end < total_frames && t.f_start <= t.f_end,
                "dataset: trajectory frame range outside [0, total_frames)");
        const auto len = static_cast<std::size_t>(t.length());
        require(t.boxes.size() == len, "dataset: boxes length does not match frame range");
        require(t.features.size() == len, "dataset: features length does not match frame range");
        for (const BoundingBox& b : t.boxes)
            require(b.w > 0.0 && b.h > 0.0, "dataset: boxes must have positive extent");
        for (const Vec& f : t.features)
            require(f.size() == feature_dim, "dataset: feature vector does not match feature_dim");
    }
    for (const GroundTruthClip& g : ground_truth) {
        require(g.f_start >= 0 && g.f_end < total_frames && g.f_start <= g.f_end,
                "dataset: ground_truth frame range outside [0, total_frames)");
        require(g.b_start.w > 0.0 && g.b_start.h > 0.0 && g.b_end.w > 0.0 && g.b_end.h > 0.0,
                "dataset: ground_truth boxes must have positive extent");
    }
}

std::string dataset_to_json(const DatasetFile& ds) {
    ds.validate();
    json j;
    j["metadata"] = {{"feature_dim", ds.feature_dim}, {"total_frames", ds.total_frames}};
    if (ds.fps) j["metadata"]["fps"] = *ds.fps;
    j["trajectories"] = json::array();
    for (const Trajectory& t : ds.trajectories) {
        json jt = {{"object_id", t.object_id}, {"f_start", t.f_start}, {"f_end", t.f_end}};
        if (!t.regime.empty()) jt["regime"] = t.regime;
        json boxes = json::array();
        for (const BoundingBox& b : t.boxes) boxes.push_back(box_to_json(b));
        jt["boxes"] = std::move(boxes);
        json feats = json::array();
        for (const Vec& f : t.features) {
            json row = json::array();
            for (Eigen::Index d = 0; d < f.size(); ++d) row.push_back(f[d]);
            feats.push_back(std::move(row));
        }
        jt["features"] = std::move(feats);
        j["trajectories"].push_back(std::move(jt));
    }
    j["ground_truth"] = json::array();
    for (const GroundTruthClip& g : ds.ground_truth)
        j["ground_truth"].push_back({{"f_start", g.f_start},
                                     {"f_end", g.f_end},
                                     {"b_start", box_to_json(g.b_start)},
                                     {"b_end", box_to_json(g.b_end)}});
    return j.dump(1);
}

DatasetFile dataset_from_json(const std::string& text) {
    const json j = json::parse(text);
    DatasetFile ds;
    const json& meta = j.at("metadata");
    ds.feature_dim = meta.at("feature_dim").get<int>();
    ds.total_frames = meta.at("total_frames").get<int>();
    if (meta.contains("fps")) ds.fps = meta.at("fps").get<double>();
    for (const json& jt : j.at("trajectories")) {
        Trajectory t;
        t.object_id = jt.at("object_id").get<int>();
        t.f_start = jt.at("f_start").get<int>();
        t.f_end = jt.at("f_end").get<int>();
        if (jt.contains("regime")) t.regime = jt.at("regime").get<std::string>();
        for (const json& jb : jt.at("boxes")) t.boxes.push_back(box_from_json(jb));
        for (const json& jf : jt.at("features")) {
            Vec f(static_cast<Eigen::Index>(jf.size()));
            for (std::size_t d = 0; d < jf.size(); ++d)
                f[static_cast<Eigen::Index>(d)] = jf[d].get<double>();
            t.features.push_back(std::move(f));
        }
        ds.trajectories.push_back(std::move(t));
    }
    if (j.contains("ground_truth")) {
        for (const json& jg : j.at("ground_truth")) {
            GroundTruthClip g;
            g.f_start = jg.at("f_start").get<int>();
            g.f_end = jg.at("f_end").get<int>();
            g.b_start = box_from_json(jg.at("b_start"));
            g.b_end = box_from_json(jg.at("b_end"));
            ds.ground_truth.push_back(g);
        }
    }
    ds.validate();
    return ds;
}

std::string checkpoint_to_json(const StackedModel& model) {
    json j;
    j["format_version"] = kCheckpointVersion;
    j["seed"] = model.config.seed;
    j["config"] = stack_config_to_json(model.config);
    j["layers"] = json::array();
    for (const AutoEncoderParams& layer : model.layers)
        j["layers"].push_back({{"encoder", lstm_to_json(layer.encoder)},
                               {"decoder", lstm_to_json(layer.decoder)},
                               {"w_yh", mat_to_json(layer.w_yh)},
                               {"b_h", vec_to_json(layer.b_h)}});
    return j.dump(1);
}

StackedModel checkpoint_from_json(const std::string& text) {
    const json j = json::parse(text);
    require(j.at("format_version").get<int>() == kCheckpointVersion,
            "checkpoint: unsupported format_version");
    StackedModel model;
    model.config = stack_config_from_json(j.at("config"), StackConfig{});
    for (const json& jl : j.at("layers")) {
        AutoEncoderParams layer;
        layer.encoder = lstm_from_json(jl.at("encoder"));
        layer.decoder = lstm_from_json(jl.at("decoder"));
        layer.w_yh = mat_from_json(jl.at("w_yh"));
        layer.b_h = vec_from_json(jl.at("b_h"));
        model.layers.push_back(std::move(layer));
    }
    require(static_cast<int>(model.layers.size()) == model.config.num_layers,
            "checkpoint: layer count does not match config.num_layers");
    return model;
}

std::string scores_to_json(const ScoreFile& scores) {
    json j;
    j["total_frames"] = scores.total_frames;
    j["clips"] = json::array();
    for (const ClipScore& cs : scores.clips)
        j["clips"].push_back({{"object_id", cs.clip.object_id},
                              {"f_start", cs.clip.f_start},
                              {"f_end", cs.clip.f_end},
                              {"b_start", box_to_json(cs.clip.b_start)},
                              {"b_end", box_to_json(cs.clip.b_end)},
                              {"raw_error", cs.raw_error},
                              {"score", cs.score}});
    j["frame_scores"] = scores.frame_scores;
    return j.dump(1);
}

ScoreFile scores_from_json(const std::string& text) {
    const json j = json::parse(text);
    ScoreFile scores;
    scores.total_frames = j.at("total_frames").get<int>();
    for (const json& jc : j.at("clips")) {
        ClipScore cs;
        cs.clip.object_id = jc.at("object_id").get<int>();
        cs.clip.f_start = jc.at("f_start").get<int>();
        cs.clip.f_end = jc.at("f_end").get<int>();
        cs.clip.b_start = box_from_json(jc.at("b_start"));
        cs.clip.b_end = box_from_json(jc.at("b_end"));
        cs.raw_error = jc.at("raw_error").get<double>();
        cs.score = jc.at("score").get<double>();
        scores.clips.push_back(std::move(cs));
    }
    scores.frame_scores = j.at("frame_scores").get<std::vector<double>>();
    return scores;
}

std::string report_to_json(const EvalReport& report) {
    json j;
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    j["f_measure"] = report.f_measure;
    j["ap"] = report.ap ? json(*report.ap) : json(nullptr);
    j["auc"] = report.auc ? json(*report.auc) : json(nullptr);
    j["tp"] = report.tp;
    j["fp"] = report.fp;
    j["fn"] = report.fn;
    return j.dump(1);
}

RunConfig run_config_from_json(const std::string& text, RunConfig base) {
    const json j = json::parse(text);
    static const std::set<std::string> allowed = {
        "num_layers", "hidden_dims", "input_dim", "seq_len", "rho", "beta", "eps",
        "lr_offline", "lr_online", "batch_offline", "epochs_offline", "online_update_epochs",
        "grad_clip", "seed", "chunk_size", "smooth_window", "min_len", "max_len",
        "boundary_threshold", "n_objects", "frames", "regime_mix", "anomaly_fraction",
        "feature_dim", "noise_sigma"};
    check_keys(j, allowed, "config");

    RunConfig cfg = std::move(base);
    cfg.stack = stack_config_from_json(j, cfg.stack);
    if (j.contains("chunk_size")) cfg.chunk_size = j.at("chunk_size").get<int>();
    if (j.contains("smooth_window")) cfg.segment.smooth_window = j.at("smooth_window").get<int>();
    if (j.contains("min_len")) cfg.segment.min_len = j.at("min_len").get<int>();
    if (j.contains("max_len")) cfg.segment.max_len = j.at("max_len").get<int>();
    if (j.contains("boundary_threshold"))
        cfg.segment.boundary_threshold = j.at("boundary_threshold").get<double>();
    if (j.contains("seed")) cfg.synth.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("n_objects")) cfg.synth.n_objects = j.at("n_objects").get<int>();
    if (j.contains("frames")) cfg.synth.frames = j.at("frames").get<int>();
    if (j.contains("regime_mix")) {
        const json& jm = j.at("regime_mix");
        check_keys(jm, {"waiting", "slow", "fast", "turning"}, "config.regime_mix");
        if (jm.contains("waiting")) cfg.synth.regime_mix[0] = jm.at("waiting").get<double>();
        if (jm.contains("slow")) cfg.synth.regime_mix[1] = jm.at("slow").get<double>();
        if (jm.contains("fast")) cfg.synth.regime_mix[2] = jm.at("fast").get<double>();
        if (jm.contains("turning")) cfg.synth.regime_mix[3] = jm.at("turning").get<double>();
    }
    if (j.contains("anomaly_fraction"))
        cfg.synth.anomaly_fraction = j.at("anomaly_fraction").get<double>();
    if (j.contains("feature_dim")) cfg.synth.feature_dim = j.at("feature_dim").get<int>();
    if (j.contains("noise_sigma")) cfg.synth.noise_sigma = j.at("noise_sigma").get<double>();
    if (j.contains("chunk_size")) require(cfg.chunk_size >= 1, "config: chunk_size must be >= 1");
    return cfg;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(out.good(), "cannot open file for writing: " + tmp);
        out << content;
        out.flush();
        require(out.good(), "failed writing file: " + tmp);
    }
    require(std::rename(tmp.c_str(), path.c_str()) == 0, "failed to move output into place: " + path);
}

DatasetFile load_dataset(const std::string& path) { return dataset_from_json(read_file(path)); }

void save_dataset(const std::string& path, const DatasetFile& ds) {
    write_file_atomic(path, dataset_to_json(ds));
}

StackedModel load_checkpoint(const std::string& path) { return checkpoint_from_json(read_file(path)); }

void save_checkpoint(const std::string& path, const StackedModel& model) {
    write_file_atomic(path, checkpoint_to_json(model));
}

ScoreFile load_scores(const std::string& path) { return scores_from_json(read_file(path)); }

void save_scores(const std::string& path, const ScoreFile& scores) {
    write_file_atomic(path, scores_to_json(scores));
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
    return run_config_from_json(read_file(path), std::move(base));
}

} // namespace vsum

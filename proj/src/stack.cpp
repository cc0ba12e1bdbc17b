#include "vsum/stack.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace vsum {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// Encoder hidden-state sequences of `layer` for every item, computed once per
// training phase (lower layers are frozen while a layer trains).
SequenceBatch lift_batch(const StackedModel& model, int layer, const SequenceBatch& dataset, Exec exec) {
    if (layer == 0) return dataset;
    SequenceBatch lifted = dataset;
    const auto n = static_cast<std::int64_t>(dataset.size());
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t k = 0; k < n; ++k) lifted[k] = layer_inputs(model, layer, dataset[k]);
    } else {
        for (std::int64_t k = 0; k < n; ++k) lifted[k] = layer_inputs(model, layer, dataset[k]);
    }
    return lifted;
}

// Mean per-sequence reconstruction loss and the sparsity penalty of one layer
// over a fixed input batch.
EpochStat evaluate_layer(const AutoEncoderParams& params, const SequenceBatch& inputs,
                         const SparsityConfig& cfg, int layer, int epoch) {
    SparsityConfig recon_only = cfg;
    recon_only.beta = 0.0;
    EpochStat stat;
    stat.layer = layer;
    stat.epoch = epoch;
    stat.recon_mean = total_loss(params, inputs, recon_only) / static_cast<double>(inputs.size());
    std::vector<Vec> contexts;
    contexts.reserve(inputs.size());
    for (const Sequence& seq : inputs) contexts.push_back(encode(params, seq).context.h);
    stat.penalty = sparsity_penalty(contexts, cfg);
    return stat;
}

AutoEncoderParams train_layer(AutoEncoderParams params, const SequenceBatch& inputs,
                              const StackConfig& cfg, int layer, const EpochLogger& on_epoch) {
    const SparsityConfig sparsity = cfg.sparsity();
    if (on_epoch) on_epoch(evaluate_layer(params, inputs, sparsity, layer, 0));
    Rng rng(Rng::mix(cfg.seed, 0x7261696E00ULL + static_cast<std::uint64_t>(layer)));
    std::vector<std::size_t> order(inputs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int epoch = 1; epoch <= cfg.epochs_offline; ++epoch) {
        rng.shuffle(order);
        for (std::size_t base = 0; base < order.size(); base += static_cast<std::size_t>(cfg.batch_offline)) {
            const std::size_t end = std::min(order.size(), base + static_cast<std::size_t>(cfg.batch_offline));
            SequenceBatch batch;
            batch.reserve(end - base);
            for (std::size_t k = base; k < end; ++k) batch.push_back(inputs[order[k]]);
            Gradients grads = backward(params, batch, sparsity);
            clip_gradients(grads, cfg.grad_clip);
            params = sgd_update(params, grads, cfg.lr_offline);
        }
        if (on_epoch) on_epoch(evaluate_layer(params, inputs, sparsity, layer, epoch));
    }
    return params;
}

} // namespace

void StackConfig::validate() const {
    require(num_layers >= 1, "num_layers must be >= 1");
    require(static_cast<int>(hidden_dims.size()) == num_layers,
            "hidden_dims length must equal num_layers");
    for (int d : hidden_dims) require(d >= 1, "hidden_dims entries must be >= 1");
    for (std::size_t m = 1; m < hidden_dims.size(); ++m)
        require(hidden_dims[m] < hidden_dims[m - 1], "hidden_dims must be strictly decreasing");
    require(input_dim >= 1, "input_dim must be >= 1");
    require(seq_len >= 1, "seq_len must be >= 1");
    require(lr_offline >= 0.0 && lr_online >= 0.0, "learning rates must be >= 0");
    require(batch_offline >= 1, "batch_offline must be >= 1");
    require(epochs_offline >= 0, "epochs_offline must be >= 0");
    require(online_update_epochs >= 0, "online_update_epochs must be >= 0");
    sparsity().validate();
}

StackedModel init_stack(const StackConfig& config) {
    config.validate();
    StackedModel model;
    model.config = config;
    model.layers.reserve(config.num_layers);
    int in_dim = config.input_dim;
    for (int m = 0; m < config.num_layers; ++m) {
        Rng rng(Rng::mix(config.seed, 0x696E697400ULL + static_cast<std::uint64_t>(m)));
        model.layers.push_back(init_auto_encoder(in_dim, config.hidden_dims[m], rng));
        in_dim = config.hidden_dims[m];
    }
    return model;
}

Sequence layer_inputs(const StackedModel& model, int layer, const Sequence& x_seq) {
    require(layer >= 0 && layer < static_cast<int>(model.layers.size()),
            "layer_inputs: layer index out of range");
    Sequence cur = x_seq;
    for (int m = 0; m < layer; ++m) cur = encode(model.layers[m], cur).h_seq;
    return cur;
}

StackedModel greedy_train(StackedModel model, const SequenceBatch& dataset, const EpochLogger& on_epoch) {
    require(!dataset.empty(), "greedy_train: dataset must be nonempty");
    for (int m = 0; m < static_cast<int>(model.layers.size()); ++m) {
        const SequenceBatch inputs = lift_batch(model, m, dataset, Exec::Parallel);
        model.layers[m] = train_layer(model.layers[m], inputs, model.config, m, on_epoch);
    }
    return model;
}

double stack_score(const StackedModel& model, const Sequence& x_seq) {
    require(!model.layers.empty(), "stack_score: model has no layers");
    double acc = 0.0;
    Sequence cur = x_seq;
    for (const AutoEncoderParams& layer : model.layers) {
        EncodeResult enc = encode(layer, cur);
        const Sequence y = decode(layer, enc.context, static_cast<int>(cur.size()));
        acc += reconstruction_loss(cur, y);
        cur = std::move(enc.h_seq);
    }
    return acc / static_cast<double>(model.layers.size());
}

std::vector<double> score_batch(const StackedModel& model, const SequenceBatch& batch, Exec exec) {
    std::vector<double> scores(batch.size(), 0.0);
    const auto n = static_cast<std::int64_t>(batch.size());
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t k = 0; k < n; ++k) scores[k] = stack_score(model, batch[k]);
    } else {
        for (std::int64_t k = 0; k < n; ++k) scores[k] = stack_score(model, batch[k]);
    }
    return scores;
}

StackedModel online_update(StackedModel model, const SequenceBatch& chunk) {
    require(!chunk.empty(), "online_update: chunk must be nonempty");
    const StackConfig& cfg = model.config;
    const SparsityConfig sparsity = cfg.sparsity();
    for (int pass = 0; pass < cfg.online_update_epochs; ++pass) {
        for (int m = 0; m < static_cast<int>(model.layers.size()); ++m) {
            const SequenceBatch inputs = lift_batch(model, m, chunk, Exec::Parallel);
            Gradients grads = backward(model.layers[m], inputs, sparsity);
            clip_gradients(grads, cfg.grad_clip);
            model.layers[m] = sgd_update(model.layers[m], grads, cfg.lr_online);
        }
    }
    return model;
}

} // namespace vsum

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "vsum/model.hpp"

namespace vsum {

struct StackConfig {
    int num_layers = 3;
    std::vector<int> hidden_dims = {32, 16, 8}; // strictly decreasing
    int input_dim = 64;
    int seq_len = 3;
    double rho = 0.05;
    double beta = 0.1;
    double eps = 1e-6;
    double lr_offline = 1e-3;
    double lr_online = 1e-4;
    int batch_offline = 100;
    int epochs_offline = 50;
    int online_update_epochs = 2;
    double grad_clip = 5.0; // elementwise clip bound; <= 0 disables
    std::uint64_t seed = 0;

    SparsityConfig sparsity() const { return {rho, beta, eps}; }
    void validate() const;
};

// Ordered auto-encoder layers; layer m consumes the encoder hidden-state
// sequence of layer m-1.
struct StackedModel {
    std::vector<AutoEncoderParams> layers;
    StackConfig config;
};

// Per-epoch training statistics. epoch == 0 reports the evaluation before any
// update of that layer; recon_mean is the mean per-sequence reconstruction
// loss over the layer's training inputs.
struct EpochStat {
    int layer = 0;
    int epoch = 0;
    double recon_mean = 0.0;
    double penalty = 0.0;
};

using EpochLogger = std::function<void(const EpochStat&)>;

// Seeded deterministic initialization of all layers.
StackedModel init_stack(const StackConfig& config);

// Input sequence of layer m: the original sequence for m == 0, otherwise the
// encoder hidden-state sequence of layer m-1 applied to that layer's inputs.
Sequence layer_inputs(const StackedModel& model, int layer, const Sequence& x_seq);

// Layer-by-layer minibatch SGD, bottom-up, lower layers frozen while a layer
// trains. Each layer draws its shuffling stream from (config.seed, layer), so
// training a prefix of the stack yields bitwise-identical prefix parameters.
StackedModel greedy_train(StackedModel model, const SequenceBatch& dataset,
                          const EpochLogger& on_epoch = {});

// Mean over layers of each layer's reconstruction loss on its own inputs.
double stack_score(const StackedModel& model, const Sequence& x_seq);

std::vector<double> score_batch(const StackedModel& model, const SequenceBatch& batch,
                                Exec exec = Exec::Parallel);

// online_update_epochs bottom-up passes over the whole chunk as one batch, at
// the online learning rate.
StackedModel online_update(StackedModel model, const SequenceBatch& chunk);

} // namespace vsum

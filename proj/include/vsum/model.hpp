#pragma once

#include <Eigen/Dense>
#include <vector>

#include "vsum/rng.hpp"

namespace vsum {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Sequence = std::vector<Vec>;
using SequenceBatch = std::vector<Sequence>;

// Execution policy for batch kernels. Parallel runs the per-sequence work
// under OpenMP; reductions are performed in batch index order, so both
// policies produce bitwise-identical results.
enum class Exec { Serial, Parallel };

// One LSTM cell's trainable tensors: input transforms, recurrent transforms,
// and gate biases for the input/forget/output gates plus the cell candidate.
struct LstmParams {
    Mat w_ix, w_fx, w_ox, w_cx; // hidden_dim x input_dim
    Mat phi_ih, phi_fh, phi_oh, phi_ch; // hidden_dim x hidden_dim
    Vec b_i, b_f, b_o, b_c; // hidden_dim

    int input_dim() const { return static_cast<int>(w_ix.cols()); }
    int hidden_dim() const { return static_cast<int>(w_ix.rows()); }
};

struct LstmState {
    Vec c;
    Vec h;
};

// One encoder-decoder pair plus the linear reconstruction map
// y = w_yh * h' + b_h. The decoder consumes zero input vectors and starts
// from the encoder's final state.
struct AutoEncoderParams {
    LstmParams encoder;
    LstmParams decoder;
    Mat w_yh; // input_dim x hidden_dim
    Vec b_h;  // input_dim

    int input_dim() const { return static_cast<int>(w_yh.rows()); }
    int hidden_dim() const { return static_cast<int>(w_yh.cols()); }
};

struct SparsityConfig {
    double rho = 0.05; // target mean activation, in (0,1)
    double beta = 0.1; // penalty weight, >= 0
    double eps = 1e-6; // clamp floor for mean activations, in (0, rho)

    void validate() const;
};

// Same shapes as the parameter set they differentiate.
struct Gradients {
    LstmParams encoder;
    LstmParams decoder;
    Mat w_yh;
    Vec b_h;
};

template <typename P, typename F> void for_each_lstm_tensor(P&& p, F&& f) {
    f(p.w_ix);
    f(p.w_fx);
    f(p.w_ox);
    f(p.w_cx);
    f(p.phi_ih);
    f(p.phi_fh);
    f(p.phi_oh);
    f(p.phi_ch);
    f(p.b_i);
    f(p.b_f);
    f(p.b_o);
    f(p.b_c);
}

template <typename P, typename F> void for_each_tensor(P&& p, F&& f) {
    for_each_lstm_tensor(p.encoder, f);
    for_each_lstm_tensor(p.decoder, f);
    f(p.w_yh);
    f(p.b_h);
}

template <typename A, typename B, typename F> void zip_lstm_tensors(A&& a, B&& b, F&& f) {
    f(a.w_ix, b.w_ix);
    f(a.w_fx, b.w_fx);
    f(a.w_ox, b.w_ox);
    f(a.w_cx, b.w_cx);
    f(a.phi_ih, b.phi_ih);
    f(a.phi_fh, b.phi_fh);
    f(a.phi_oh, b.phi_oh);
    f(a.phi_ch, b.phi_ch);
    f(a.b_i, b.b_i);
    f(a.b_f, b.b_f);
    f(a.b_o, b.b_o);
    f(a.b_c, b.b_c);
}

template <typename A, typename B, typename F> void zip_tensors(A&& a, B&& b, F&& f) {
    zip_lstm_tensors(a.encoder, b.encoder, f);
    zip_lstm_tensors(a.decoder, b.decoder, f);
    f(a.w_yh, b.w_yh);
    f(a.b_h, b.b_h);
}

// Uniform [-s, s] with s = 1/sqrt(fan_in) for the matrices, zero biases.
// Draw order is fixed, so a given seed always produces the same tensors.
AutoEncoderParams init_auto_encoder(int input_dim, int hidden_dim, Rng& rng);

Gradients zero_gradients(const AutoEncoderParams& params);

// Single cell update: gates from x and the previous hidden state, new memory
// cell from the gated candidate and the forgotten previous cell.
LstmState lstm_step(const LstmParams& params, const Vec& x, const LstmState& prev);

struct EncodeResult {
    Sequence h_seq;    // hidden state after each input
    LstmState context; // final (c_T, h_T)
};

// Runs the encoder over x_seq from a zero initial state.
EncodeResult encode(const AutoEncoderParams& params, const Sequence& x_seq);

// Runs the decoder for `steps` steps from initial state = context, feeding a
// zero input vector each step, and maps hidden states through y = w_yh*h + b_h.
// Outputs reconstruct the input sequence in reverse order.
Sequence decode(const AutoEncoderParams& params, const LstmState& context, int steps);

// (1/2T) sum_t ||x_t - y_{T+1-t}||^2. The reversal of decoder targets is
// applied here; callers pass both sequences in natural order.
double reconstruction_loss(const Sequence& x_seq, const Sequence& y_seq);

// Mean activation per hidden dimension over a batch of final hidden states,
// with h mapped into (0,1) via a = (h+1)/2.
Vec mean_activations(const std::vector<Vec>& contexts_h);

// sum_d KL(rho || rho_hat_d) where rho_hat_d is the batch mean activation of
// dimension d, clamped to [eps, 1-eps].
double sparsity_penalty(const std::vector<Vec>& contexts_h, const SparsityConfig& cfg);

// sum_k reconstruction_loss(X_k, Y_k) + beta * sparsity penalty over the
// batch's final encoder hidden states.
double total_loss(const AutoEncoderParams& params, const SequenceBatch& batch,
                  const SparsityConfig& cfg, Exec exec = Exec::Parallel);

// Exact gradients of total_loss via backpropagation through time, including
// the sparsity term's path through each sequence's final encoder state.
Gradients backward(const AutoEncoderParams& params, const SequenceBatch& batch,
                   const SparsityConfig& cfg, Exec exec = Exec::Parallel);

// Elementwise clip of every gradient entry to [-limit, limit]. No-op when
// limit <= 0.
void clip_gradients(Gradients& grads, double limit);

// theta <- theta - lr * g for every entry; returns the updated parameters.
AutoEncoderParams sgd_update(const AutoEncoderParams& params, const Gradients& grads, double lr);

} // namespace vsum

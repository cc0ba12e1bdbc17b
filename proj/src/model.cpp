#include "vsum/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vsum {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

Vec sigmoid(const Vec& z) { return (1.0 / (1.0 + (-z.array()).exp())).matrix(); }

Vec tanh_vec(const Vec& z) { return z.array().tanh().matrix(); }

// Post-activation values recorded during the forward pass, consumed by BPTT.
struct LstmTrace {
    std::vector<Vec> i, f, o, g, c, tanh_c, h;
    LstmState init;

    const Vec& h_prev(int t) const { return t > 0 ? h[t - 1] : init.h; }
    const Vec& c_prev(int t) const { return t > 0 ? c[t - 1] : init.c; }
};

// Runs the cell for `steps` steps. xs == nullptr means a zero input vector at
// every step (the decoder case).
LstmTrace run_lstm(const LstmParams& p, const Vec* xs, int steps, LstmState init) {
    LstmTrace tr;
    tr.init = std::move(init);
    tr.i.reserve(steps);
    tr.f.reserve(steps);
    tr.o.reserve(steps);
    tr.g.reserve(steps);
    tr.c.reserve(steps);
    tr.tanh_c.reserve(steps);
    tr.h.reserve(steps);
    for (int t = 0; t < steps; ++t) {
        const Vec& h_prev = tr.h_prev(t);
        const Vec& c_prev = tr.c_prev(t);
        Vec ai = p.phi_ih * h_prev + p.b_i;
        Vec af = p.phi_fh * h_prev + p.b_f;
        Vec ao = p.phi_oh * h_prev + p.b_o;
        Vec ag = p.phi_ch * h_prev + p.b_c;
        if (xs != nullptr) {
            ai += p.w_ix * xs[t];
            af += p.w_fx * xs[t];
            ao += p.w_ox * xs[t];
            ag += p.w_cx * xs[t];
        }
        tr.i.push_back(sigmoid(ai));
        tr.f.push_back(sigmoid(af));
        tr.o.push_back(sigmoid(ao));
        tr.g.push_back(tanh_vec(ag));
        tr.c.push_back((tr.i[t].array() * tr.g[t].array() + tr.f[t].array() * c_prev.array()).matrix());
        tr.tanh_c.push_back(tanh_vec(tr.c[t]));
        tr.h.push_back((tr.o[t].array() * tr.tanh_c[t].array()).matrix());
    }
    return tr;
}

void check_sequence(const AutoEncoderParams& params, const Sequence& seq) {
    require(!seq.empty(), "sequence must be nonempty");
    for (const Vec& x : seq)
        require(x.size() == params.input_dim(), "sequence vector length does not match input_dim");
}

// Gradient of beta * sparsity_penalty w.r.t. each sequence's final encoder
// hidden state. Zero where the clamp on rho_hat is active.
Vec sparsity_context_grad(const std::vector<Vec>& contexts_h, const SparsityConfig& cfg) {
    const auto batch = static_cast<double>(contexts_h.size());
    const Vec raw_mean = mean_activations(contexts_h);
    Vec grad = Vec::Zero(raw_mean.size());
    for (Eigen::Index d = 0; d < raw_mean.size(); ++d) {
        const double m = raw_mean[d];
        if (m <= cfg.eps || m >= 1.0 - cfg.eps) continue;
        const double dkl = -cfg.rho / m + (1.0 - cfg.rho) / (1.0 - m);
        grad[d] = cfg.beta * dkl / (2.0 * batch);
    }
    return grad;
}

struct ItemForward {
    LstmTrace enc;
    LstmTrace dec;
    Sequence y_seq;
    double recon = 0.0;
};

ItemForward forward_one(const AutoEncoderParams& params, const Sequence& x_seq) {
    ItemForward fv;
    const int steps = static_cast<int>(x_seq.size());
    const int hidden = params.hidden_dim();
    fv.enc = run_lstm(params.encoder, x_seq.data(), steps, {Vec::Zero(hidden), Vec::Zero(hidden)});
    fv.dec = run_lstm(params.decoder, nullptr, steps, {fv.enc.c.back(), fv.enc.h.back()});
    fv.y_seq.reserve(steps);
    for (int s = 0; s < steps; ++s) fv.y_seq.push_back(params.w_yh * fv.dec.h[s] + params.b_h);
    fv.recon = reconstruction_loss(x_seq, fv.y_seq);
    return fv;
}

struct CellGrads {
    LstmParams* out;
    const LstmTrace* tr;

    // Returns (dh_prev, dc_prev). xs == nullptr for the decoder's zero inputs.
    std::pair<Vec, Vec> step(const LstmParams& p, int t, const Vec* x, const Vec& dh, const Vec& dc_in) {
        const Vec& i = tr->i[t];
        const Vec& f = tr->f[t];
        const Vec& o = tr->o[t];
        const Vec& g = tr->g[t];
        const Vec& tc = tr->tanh_c[t];
        const Vec& h_prev = tr->h_prev(t);
        const Vec& c_prev = tr->c_prev(t);

        Vec dao = (dh.array() * tc.array() * o.array() * (1.0 - o.array())).matrix();
        Vec dc = dc_in + (dh.array() * o.array() * (1.0 - tc.array().square())).matrix();
        Vec dai = (dc.array() * g.array() * i.array() * (1.0 - i.array())).matrix();
        Vec dag = (dc.array() * i.array() * (1.0 - g.array().square())).matrix();
        Vec daf = (dc.array() * c_prev.array() * f.array() * (1.0 - f.array())).matrix();

        if (x != nullptr) {
            out->w_ix.noalias() += dai * x->transpose();
            out->w_fx.noalias() += daf * x->transpose();
            out->w_ox.noalias() += dao * x->transpose();
            out->w_cx.noalias() += dag * x->transpose();
        }
        out->phi_ih.noalias() += dai * h_prev.transpose();
        out->phi_fh.noalias() += daf * h_prev.transpose();
        out->phi_oh.noalias() += dao * h_prev.transpose();
        out->phi_ch.noalias() += dag * h_prev.transpose();
        out->b_i += dai;
        out->b_f += daf;
        out->b_o += dao;
        out->b_c += dag;

        Vec dh_prev = p.phi_ih.transpose() * dai + p.phi_fh.transpose() * daf +
                      p.phi_oh.transpose() * dao + p.phi_ch.transpose() * dag;
        Vec dc_prev = (dc.array() * f.array()).matrix();
        return {std::move(dh_prev), std::move(dc_prev)};
    }
};

// One sequence's contribution to the batch gradient, accumulated into `out`.
// extra_dh_context is the sparsity term's gradient on this item's final
// encoder hidden state.
void backward_one(const AutoEncoderParams& params, const Sequence& x_seq, const Vec& extra_dh_context,
                  Gradients& out) {
    const int steps = static_cast<int>(x_seq.size());
    const double inv_t = 1.0 / static_cast<double>(steps);
    const ItemForward fv = forward_one(params, x_seq);

    // Decoder and reconstruction map.
    CellGrads dec_grads{&out.decoder, &fv.dec};
    Vec dh_next = Vec::Zero(params.hidden_dim());
    Vec dc_next = Vec::Zero(params.hidden_dim());
    for (int s = steps - 1; s >= 0; --s) {
        const Vec dy = inv_t * (fv.y_seq[s] - x_seq[steps - 1 - s]);
        out.w_yh.noalias() += dy * fv.dec.h[s].transpose();
        out.b_h += dy;
        const Vec dh = params.w_yh.transpose() * dy + dh_next;
        auto [dh_prev, dc_prev] = dec_grads.step(params.decoder, s, nullptr, dh, dc_next);
        dh_next = std::move(dh_prev);
        dc_next = std::move(dc_prev);
    }

    // Into the encoder through the context state.
    CellGrads enc_grads{&out.encoder, &fv.enc};
    Vec dh = dh_next + extra_dh_context;
    Vec dc = std::move(dc_next);
    for (int t = steps - 1; t >= 0; --t) {
        auto [dh_prev, dc_prev] = enc_grads.step(params.encoder, t, &x_seq[t], dh, dc);
        dh = std::move(dh_prev);
        dc = std::move(dc_prev);
    }
}

void add_gradients(Gradients& acc, const Gradients& g) {
    zip_tensors(acc, g, [](auto& a, const auto& b) { a += b; });
}

void set_zero(Gradients& g) {
    for_each_tensor(g, [](auto& t) { t.setZero(); });
}

void check_batch(const AutoEncoderParams& params, const SequenceBatch& batch) {
    require(!batch.empty(), "batch must be nonempty");
    for (const Sequence& seq : batch) check_sequence(params, seq);
}

} // namespace

void SparsityConfig::validate() const {
    require(rho > 0.0 && rho < 1.0, "rho must lie in (0, 1)");
    require(beta >= 0.0, "beta must be >= 0");
    require(eps > 0.0 && eps < rho, "eps must lie in (0, rho)");
}

AutoEncoderParams init_auto_encoder(int input_dim, int hidden_dim, Rng& rng) {
    require(input_dim >= 1 && hidden_dim >= 1, "dimensions must be >= 1");
    auto fill = [&rng](Mat& m, double s) {
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-s, s);
    };
    auto init_lstm = [&](int in_dim) {
        LstmParams p;
        const double s_in = 1.0 / std::sqrt(static_cast<double>(in_dim));
        const double s_rec = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
        for (Mat* m : {&p.w_ix, &p.w_fx, &p.w_ox, &p.w_cx}) {
            m->resize(hidden_dim, in_dim);
            fill(*m, s_in);
        }
        for (Mat* m : {&p.phi_ih, &p.phi_fh, &p.phi_oh, &p.phi_ch}) {
            m->resize(hidden_dim, hidden_dim);
            fill(*m, s_rec);
        }
        for (Vec* v : {&p.b_i, &p.b_f, &p.b_o, &p.b_c}) *v = Vec::Zero(hidden_dim);
        return p;
    };
    AutoEncoderParams ae;
    ae.encoder = init_lstm(input_dim);
    ae.decoder = init_lstm(input_dim);
    ae.w_yh.resize(input_dim, hidden_dim);
    fill(ae.w_yh, 1.0 / std::sqrt(static_cast<double>(hidden_dim)));
    ae.b_h = Vec::Zero(input_dim);
    return ae;
}

Gradients zero_gradients(const AutoEncoderParams& params) {
    Gradients g;
    zip_tensors(g, params, [](auto& t, const auto& p) { t = p; });
    set_zero(g);
    return g;
}

LstmState lstm_step(const LstmParams& params, const Vec& x, const LstmState& prev) {
    require(x.size() == params.input_dim(), "lstm_step: input length does not match input_dim");
    require(prev.c.size() == params.hidden_dim() && prev.h.size() == params.hidden_dim(),
            "lstm_step: state dims do not match hidden_dim");
    const LstmTrace tr = run_lstm(params, &x, 1, prev);
    return {tr.c[0], tr.h[0]};
}

EncodeResult encode(const AutoEncoderParams& params, const Sequence& x_seq) {
    check_sequence(params, x_seq);
    const int hidden = params.hidden_dim();
    LstmTrace tr = run_lstm(params.encoder, x_seq.data(), static_cast<int>(x_seq.size()),
                            {Vec::Zero(hidden), Vec::Zero(hidden)});
    EncodeResult res;
    res.context = {tr.c.back(), tr.h.back()};
    res.h_seq = std::move(tr.h);
    return res;
}

Sequence decode(const AutoEncoderParams& params, const LstmState& context, int steps) {
    require(steps >= 1, "decode: steps must be >= 1");
    require(context.c.size() == params.hidden_dim() && context.h.size() == params.hidden_dim(),
            "decode: context dims do not match hidden_dim");
    const LstmTrace tr = run_lstm(params.decoder, nullptr, steps, context);
    Sequence y;
    y.reserve(steps);
    for (int s = 0; s < steps; ++s) y.push_back(params.w_yh * tr.h[s] + params.b_h);
    return y;
}

double reconstruction_loss(const Sequence& x_seq, const Sequence& y_seq) {
    require(x_seq.size() == y_seq.size(), "reconstruction_loss: sequence lengths differ");
    require(!x_seq.empty(), "reconstruction_loss: sequences must be nonempty");
    const std::size_t steps = x_seq.size();
    double acc = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
        const Vec& y = y_seq[steps - 1 - t];
        require(x_seq[t].size() == y.size(), "reconstruction_loss: vector dims differ");
        acc += (x_seq[t] - y).squaredNorm();
    }
    return acc / (2.0 * static_cast<double>(steps));
}

Vec mean_activations(const std::vector<Vec>& contexts_h) {
    if (contexts_h.empty()) throw std::invalid_argument("mean_activations: empty batch");
    Vec sum = Vec::Zero(contexts_h.front().size());
    for (const Vec& h : contexts_h) {
        if (h.size() != sum.size())
            throw std::invalid_argument("mean_activations: mixed hidden dims");
        sum += ((h.array() + 1.0) * 0.5).matrix();
    }
    return sum / static_cast<double>(contexts_h.size());
}

double sparsity_penalty(const std::vector<Vec>& contexts_h, const SparsityConfig& cfg) {
    cfg.validate();
    const Vec mean = mean_activations(contexts_h);
    double acc = 0.0;
    for (Eigen::Index d = 0; d < mean.size(); ++d) {
        const double m = std::clamp(mean[d], cfg.eps, 1.0 - cfg.eps);
        acc += cfg.rho * std::log(cfg.rho / m) + (1.0 - cfg.rho) * std::log((1.0 - cfg.rho) / (1.0 - m));
    }
    return acc;
}

double total_loss(const AutoEncoderParams& params, const SequenceBatch& batch, const SparsityConfig& cfg,
                  Exec exec) {
    cfg.validate();
    check_batch(params, batch);
    const auto n = static_cast<std::int64_t>(batch.size());
    std::vector<double> recon(n, 0.0);
    std::vector<Vec> contexts(n);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t k = 0; k < n; ++k) {
            const ItemForward fv = forward_one(params, batch[k]);
            recon[k] = fv.recon;
            contexts[k] = fv.enc.h.back();
        }
    } else {
        for (std::int64_t k = 0; k < n; ++k) {
            const ItemForward fv = forward_one(params, batch[k]);
            recon[k] = fv.recon;
            contexts[k] = fv.enc.h.back();
        }
    }
    double loss = 0.0;
    for (std::int64_t k = 0; k < n; ++k) loss += recon[k];
    if (cfg.beta > 0.0) loss += cfg.beta * sparsity_penalty(contexts, cfg);
    return loss;
}

Gradients backward(const AutoEncoderParams& params, const SequenceBatch& batch, const SparsityConfig& cfg,
                   Exec exec) {
    cfg.validate();
    check_batch(params, batch);
    const auto n = static_cast<std::int64_t>(batch.size());

    // Pass 1: final encoder hidden states, for the batch-coupled sparsity
    // term. Skipped entirely when the penalty is off.
    Vec extra_dh = Vec::Zero(params.hidden_dim());
    if (cfg.beta > 0.0) {
        std::vector<Vec> contexts(n);
        if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
            for (std::int64_t k = 0; k < n; ++k) contexts[k] = encode(params, batch[k]).context.h;
        } else {
            for (std::int64_t k = 0; k < n; ++k) contexts[k] = encode(params, batch[k]).context.h;
        }
        extra_dh = sparsity_context_grad(contexts, cfg);
    }

    // Pass 2: the batch is folded over a fixed number of contiguous stripes,
    // each stripe accumulating its items in index order, and the stripe sums
    // folded in stripe order. Both policies run the identical structure, so
    // the result is bitwise independent of the thread count.
    constexpr std::int64_t kStripes = 8;
    std::vector<Gradients> stripe_acc;
    stripe_acc.reserve(kStripes);
    for (std::int64_t b = 0; b < kStripes; ++b) stripe_acc.push_back(zero_gradients(params));

    const auto run_stripe = [&](std::int64_t b) {
        Gradients item = zero_gradients(params);
        for (std::int64_t k = b * n / kStripes; k < (b + 1) * n / kStripes; ++k) {
            set_zero(item);
            backward_one(params, batch[k], extra_dh, item);
            add_gradients(stripe_acc[b], item);
        }
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t b = 0; b < kStripes; ++b) run_stripe(b);
    } else {
        for (std::int64_t b = 0; b < kStripes; ++b) run_stripe(b);
    }
    Gradients acc = std::move(stripe_acc.front());
    for (std::int64_t b = 1; b < kStripes; ++b) add_gradients(acc, stripe_acc[b]);
    return acc;
}

void clip_gradients(Gradients& grads, double limit) {
    if (limit <= 0.0) return;
    for_each_tensor(grads, [limit](auto& t) {
        t = t.array().min(limit).max(-limit).matrix();
    });
}

AutoEncoderParams sgd_update(const AutoEncoderParams& params, const Gradients& grads, double lr) {
    require(lr >= 0.0, "sgd_update: lr must be >= 0");
    AutoEncoderParams updated = params;
    zip_tensors(updated, grads, [lr](auto& p, const auto& g) {
        require(p.rows() == g.rows() && p.cols() == g.cols(), "sgd_update: shape mismatch");
        p -= lr * g;
    });
    return updated;
}

} // namespace vsum

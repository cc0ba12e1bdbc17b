#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vsum/gradcheck.hpp"
#include "vsum/model.hpp"

using namespace vsum;

namespace {

LstmParams scalar_lstm() {
    LstmParams p;
    for (Mat* m : {&p.w_ix, &p.w_fx, &p.w_ox, &p.w_cx, &p.phi_ih, &p.phi_fh, &p.phi_oh, &p.phi_ch})
        *m = Mat::Zero(1, 1);
    for (Vec* v : {&p.b_i, &p.b_f, &p.b_o, &p.b_c}) *v = Vec::Zero(1);
    return p;
}

AutoEncoderParams zero_ae(int input_dim, int hidden_dim) {
    Rng rng(0);
    AutoEncoderParams ae = init_auto_encoder(input_dim, hidden_dim, rng);
    for_each_tensor(ae, [](auto& t) { t.setZero(); });
    return ae;
}

AutoEncoderParams random_ae(int input_dim, int hidden_dim, std::uint64_t seed) {
    Rng rng(seed);
    return init_auto_encoder(input_dim, hidden_dim, rng);
}

Sequence random_sequence(int steps, int dim, Rng& rng) {
    Sequence seq(steps);
    for (Vec& x : seq) {
        x.resize(dim);
        for (int d = 0; d < dim; ++d) x[d] = rng.uniform(-1.0, 1.0);
    }
    return seq;
}

double sigmoid_s(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Vec scalar(double v) { return Vec::Constant(1, v); }

} // namespace

TEST_CASE("lstm_step with all-zero parameters and inputs stays at zero") {
    LstmParams p = scalar_lstm();
    const LstmState out = lstm_step(p, scalar(0.0), {scalar(0.0), scalar(0.0)});
    CHECK(out.c[0] == 0.0);
    CHECK(out.h[0] == 0.0);
}

TEST_CASE("lstm_step scalar trace: zero weights, previous cell 2") {
    LstmParams p = scalar_lstm();
    const LstmState out = lstm_step(p, scalar(0.0), {scalar(2.0), scalar(0.0)});
    // gates all 0.5, candidate tanh(0)=0: c = 0.5*0 + 0.5*2 = 1, h = 0.5*tanh(1)
    CHECK(out.c[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(out.h[0] == doctest::Approx(0.5 * std::tanh(1.0)).epsilon(1e-15));
    CHECK(out.h[0] == doctest::Approx(0.3807970779778824).epsilon(1e-12));
}

TEST_CASE("lstm_step forget gate bias -20 discards previous memory") {
    LstmParams p = scalar_lstm();
    p.b_f[0] = -20.0;
    const LstmState out = lstm_step(p, scalar(0.0), {scalar(5.0), scalar(0.0)});
    const double f = sigmoid_s(-20.0);
    CHECK(out.c[0] == doctest::Approx(5.0 * f).epsilon(1e-12));
    CHECK(out.c[0] < 1.1e-8);
    CHECK(out.h[0] == doctest::Approx(0.5 * std::tanh(5.0 * f)).epsilon(1e-12));
    CHECK(out.h[0] < 1e-8);
}

TEST_CASE("lstm_step rejects mismatched dimensions") {
    LstmParams p = scalar_lstm();
    CHECK_THROWS_AS(lstm_step(p, Vec::Zero(2), {scalar(0.0), scalar(0.0)}), std::invalid_argument);
    CHECK_THROWS_AS(lstm_step(p, scalar(0.0), {Vec::Zero(2), Vec::Zero(2)}), std::invalid_argument);
}

TEST_CASE("lstm_step is deterministic and keeps gates in range") {
    const AutoEncoderParams ae = random_ae(5, 4, 11);
    Rng rng(3);
    const Sequence xs = random_sequence(1, 5, rng);
    LstmState prev{Vec::Zero(4), Vec::Zero(4)};
    const LstmState a = lstm_step(ae.encoder, xs[0], prev);
    const LstmState b = lstm_step(ae.encoder, xs[0], prev);
    CHECK((a.c.array() == b.c.array()).all());
    CHECK((a.h.array() == b.h.array()).all());
    CHECK((a.h.array().abs() < 1.0).all());
    CHECK(a.c.allFinite());
}

TEST_CASE("encode with T=1 reduces to one lstm_step from zero state") {
    const AutoEncoderParams ae = random_ae(4, 3, 5);
    Rng rng(9);
    const Sequence xs = random_sequence(1, 4, rng);
    const EncodeResult enc = encode(ae, xs);
    const LstmState step = lstm_step(ae.encoder, xs[0], {Vec::Zero(3), Vec::Zero(3)});
    CHECK((enc.context.c.array() == step.c.array()).all());
    CHECK((enc.context.h.array() == step.h.array()).all());
    CHECK(enc.h_seq.size() == 1);
}

TEST_CASE("encode with all-zero parameters returns all-zero hidden states") {
    const AutoEncoderParams ae = zero_ae(4, 3);
    Rng rng(10);
    const EncodeResult enc = encode(ae, random_sequence(3, 4, rng));
    for (const Vec& h : enc.h_seq) CHECK(h.isZero(0.0));
}

TEST_CASE("encode matches a hand-evaluated scalar recurrence for T=3") {
    AutoEncoderParams ae = zero_ae(1, 1);
    ae.encoder.b_i[0] = 10.0;
    ae.encoder.b_c[0] = 10.0;
    const Sequence xs = {scalar(0.0), scalar(0.0), scalar(0.0)};
    const EncodeResult enc = encode(ae, xs);

    double c = 0.0, h = 0.0;
    for (int t = 0; t < 3; ++t) {
        const double i = sigmoid_s(10.0);
        const double f = sigmoid_s(0.0);
        const double o = sigmoid_s(0.0);
        const double g = std::tanh(10.0);
        c = i * g + f * c;
        h = o * std::tanh(c);
        CHECK(enc.h_seq[t][0] == doctest::Approx(h).epsilon(1e-15));
    }
    CHECK(enc.context.c[0] == doctest::Approx(c).epsilon(1e-15));
}

TEST_CASE("encode rejects an empty sequence") {
    const AutoEncoderParams ae = zero_ae(4, 3);
    CHECK_THROWS_AS(encode(ae, Sequence{}), std::invalid_argument);
}

TEST_CASE("decode with zero mapping emits the bias at every step") {
    AutoEncoderParams ae = random_ae(4, 3, 21);
    ae.w_yh.setZero();
    ae.b_h << 1.0, -2.0, 0.5, 3.0;
    const Sequence y = decode(ae, {Vec::Zero(3), Vec::Zero(3)}, 3);
    // decoder params are random but w_yh = 0 kills every hidden contribution
    for (const Vec& yt : y) CHECK((yt.array() == ae.b_h.array()).all());
}

TEST_CASE("decode from a zero context with zero decoder emits b_h") {
    AutoEncoderParams ae = zero_ae(2, 3);
    ae.b_h << 0.25, -0.75;
    const Sequence y = decode(ae, {Vec::Zero(3), Vec::Zero(3)}, 4);
    CHECK(y.size() == 4);
    for (const Vec& yt : y) CHECK((yt.array() == ae.b_h.array()).all());
}

TEST_CASE("decode scalar trace with open output gate follows the forget-gated cell") {
    AutoEncoderParams ae = zero_ae(1, 1);
    ae.decoder.b_o[0] = 20.0;
    ae.w_yh = Mat::Constant(1, 1, 1.0);
    const double c0 = 0.8, h0 = 0.3;
    const Sequence y = decode(ae, {scalar(c0), scalar(h0)}, 2);

    double c = c0;
    for (int s = 0; s < 2; ++s) {
        const double o = sigmoid_s(20.0);
        c = 0.5 * std::tanh(0.0) + 0.5 * c; // i=f=0.5, candidate 0
        const double h = o * std::tanh(c);
        CHECK(y[s][0] == doctest::Approx(h).epsilon(1e-12));
    }
}

TEST_CASE("decode output length equals the requested steps") {
    const AutoEncoderParams ae = random_ae(3, 2, 33);
    const EncodeResult enc = encode(ae, {Vec::Zero(3)});
    for (int steps = 1; steps <= 5; ++steps) CHECK(decode(ae, enc.context, steps).size() == steps);
    CHECK_THROWS_AS(decode(ae, {Vec::Zero(1), Vec::Zero(1)}, 2), std::invalid_argument);
}

TEST_CASE("reconstruction_loss is zero exactly on the reversed sequence") {
    Rng rng(14);
    const Sequence x = random_sequence(4, 3, rng);
    Sequence y(x.rbegin(), x.rend());
    CHECK(reconstruction_loss(x, y) == 0.0);
    y[2][1] += 0.1;
    CHECK(reconstruction_loss(x, y) > 0.0);
}

TEST_CASE("reconstruction_loss worked examples") {
    CHECK(reconstruction_loss({scalar(2.0)}, {scalar(0.0)}) == doctest::Approx(2.0).epsilon(1e-15));
    // palindromic pair: x=(1,3) vs y=(3,1) pairs each x_t with itself
    CHECK(reconstruction_loss({scalar(1.0), scalar(3.0)}, {scalar(3.0), scalar(1.0)}) == 0.0);
    CHECK_THROWS_AS(reconstruction_loss({scalar(1.0)}, {scalar(1.0), scalar(2.0)}),
                    std::invalid_argument);
}

TEST_CASE("sparsity_penalty is zero at the target and positive elsewhere") {
    const SparsityConfig cfg{0.05, 1.0, 1e-6};
    // h = 2*rho - 1 maps to activation exactly rho
    const Vec at_target = Vec::Constant(3, 2.0 * cfg.rho - 1.0);
    CHECK(sparsity_penalty({at_target, at_target}, cfg) == doctest::Approx(0.0).epsilon(1e-12));
    const Vec off_target = Vec::Constant(3, 0.2);
    CHECK(sparsity_penalty({off_target}, cfg) > 0.0);
    CHECK_THROWS_AS(sparsity_penalty({}, cfg), std::invalid_argument);
}

TEST_CASE("sparsity_penalty worked example at rho_hat = 0.5") {
    const SparsityConfig cfg{0.05, 1.0, 1e-6};
    const double expected = 0.05 * std::log(0.1) + 0.95 * std::log(1.9);
    CHECK(sparsity_penalty({Vec::Zero(1)}, cfg) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(sparsity_penalty({Vec::Zero(1)}, cfg) == doctest::Approx(0.4946319372140726).epsilon(1e-12));
}

TEST_CASE("total_loss with beta 0 is the sum of reconstruction losses") {
    const AutoEncoderParams ae = random_ae(3, 2, 40);
    Rng rng(41);
    const SequenceBatch batch = {random_sequence(3, 3, rng), random_sequence(3, 3, rng)};
    const SparsityConfig cfg{0.05, 0.0, 1e-6};
    double expected = 0.0;
    for (const Sequence& seq : batch) {
        const EncodeResult enc = encode(ae, seq);
        expected += reconstruction_loss(seq, decode(ae, enc.context, 3));
    }
    CHECK(total_loss(ae, batch, cfg) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("total_loss composes reconstruction and sparsity for K=1") {
    const AutoEncoderParams ae = random_ae(2, 2, 50);
    Rng rng(51);
    const SequenceBatch batch = {random_sequence(2, 2, rng)};
    const SparsityConfig cfg{0.05, 0.7, 1e-6};
    const EncodeResult enc = encode(ae, batch[0]);
    const double recon = reconstruction_loss(batch[0], decode(ae, enc.context, 2));
    const double kl = sparsity_penalty({enc.context.h}, cfg);
    CHECK(total_loss(ae, batch, cfg) == doctest::Approx(recon + cfg.beta * kl).epsilon(1e-14));
}

TEST_CASE("perfect reconstruction with beta 0 yields zero loss and zero gradients") {
    // all-zero parameters on all-zero input reconstruct exactly
    const AutoEncoderParams ae = zero_ae(3, 2);
    const SequenceBatch batch = {Sequence(3, Vec::Zero(3))};
    const SparsityConfig cfg{0.05, 0.0, 1e-6};
    CHECK(total_loss(ae, batch, cfg) == 0.0);
    const Gradients grads = backward(ae, batch, cfg);
    for_each_tensor(grads, [](const auto& t) { CHECK(t.isZero(0.0)); });
}

TEST_CASE("backward b_h gradient matches the hand-derived MSE derivative") {
    const AutoEncoderParams ae = random_ae(1, 1, 60);
    Rng rng(61);
    const SequenceBatch batch = {random_sequence(3, 1, rng)};
    const SparsityConfig cfg{0.05, 0.0, 1e-6};
    const Gradients grads = backward(ae, batch, cfg);

    const Sequence& x = batch[0];
    const Sequence y = decode(ae, encode(ae, x).context, 3);
    double expected = 0.0;
    for (int s = 0; s < 3; ++s) expected += (y[s][0] - x[static_cast<std::size_t>(2 - s)][0]) / 3.0;
    CHECK(grads.b_h[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("backward matches central finite differences") {
    GradCheckConfig cfg;
    cfg.instances = 3;
    cfg.max_input_dim = 5;
    cfg.max_hidden_dim = 4;
    cfg.seed = 1234;
    const GradCheckReport report = run_gradcheck(cfg);
    CHECK(report.pass);
    CHECK(report.max_rel_err <= 1e-4);
}

TEST_CASE("backward matches finite differences on the 5x4 T=3 K=2 instance") {
    GradCheckConfig cfg;
    cfg.instances = 2;
    cfg.fixed_input_dim = 5;
    cfg.fixed_hidden_dim = 4;
    cfg.fixed_seq_len = 3;
    cfg.fixed_batch = 2;
    cfg.seed = 777;
    const GradCheckReport report = run_gradcheck(cfg);
    CHECK(report.pass);
    for (const GradCheckInstance& inst : report.instances) {
        CHECK(inst.input_dim == 5);
        CHECK(inst.hidden_dim == 4);
        CHECK(inst.seq_len == 3);
        CHECK(inst.batch == 2);
        CHECK(inst.max_rel_err <= 1e-4);
    }
}

TEST_CASE("gradcheck harness notices a corrupted gradient") {
    GradCheckConfig cfg;
    cfg.instances = 1;
    cfg.betas = {0.1};
    cfg.corrupt = true;
    const GradCheckReport report = run_gradcheck(cfg);
    CHECK_FALSE(report.pass);
}

TEST_CASE("sgd_update arithmetic and the lr=0 identity") {
    const AutoEncoderParams ae = random_ae(3, 2, 70);
    Gradients grads = zero_gradients(ae);
    grads.w_yh(0, 0) = 2.0;
    const AutoEncoderParams same = sgd_update(ae, grads, 0.0);
    bool identical = true;
    zip_tensors(same, ae, [&identical](const auto& a, const auto& b) {
        if ((a.array() != b.array()).any()) identical = false;
    });
    CHECK(identical);

    AutoEncoderParams one = zero_ae(1, 1);
    one.w_yh(0, 0) = 1.0;
    Gradients g1 = zero_gradients(one);
    g1.w_yh(0, 0) = 2.0;
    CHECK(sgd_update(one, g1, 0.1).w_yh(0, 0) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("sgd_update rejects mismatched shapes") {
    const AutoEncoderParams ae = random_ae(3, 2, 71);
    const Gradients bad = zero_gradients(random_ae(4, 2, 71));
    CHECK_THROWS_AS(sgd_update(ae, bad, 0.1), std::invalid_argument);
}

TEST_CASE("a small sgd step decreases the loss") {
    const AutoEncoderParams ae = random_ae(4, 3, 80);
    Rng rng(81);
    const SequenceBatch batch = {random_sequence(3, 4, rng), random_sequence(3, 4, rng)};
    const SparsityConfig cfg{0.05, 0.1, 1e-6};
    const double before = total_loss(ae, batch, cfg);
    const Gradients grads = backward(ae, batch, cfg);
    const double after = total_loss(sgd_update(ae, grads, 1e-4), batch, cfg);
    CHECK(after < before);
}

TEST_CASE("clip_gradients bounds every entry and can be disabled") {
    const AutoEncoderParams ae = random_ae(2, 2, 90);
    Gradients grads = zero_gradients(ae);
    grads.encoder.w_ix(0, 0) = 100.0;
    grads.b_h[0] = -7.0;
    Gradients clipped = grads;
    clip_gradients(clipped, 5.0);
    CHECK(clipped.encoder.w_ix(0, 0) == 5.0);
    CHECK(clipped.b_h[0] == -5.0);
    Gradients untouched = grads;
    clip_gradients(untouched, 0.0);
    CHECK(untouched.encoder.w_ix(0, 0) == 100.0);
}

TEST_CASE("init_auto_encoder is deterministic per seed") {
    const AutoEncoderParams a = random_ae(6, 4, 123);
    const AutoEncoderParams b = random_ae(6, 4, 123);
    bool identical = true;
    zip_tensors(a, b, [&identical](const auto& x, const auto& y) {
        if ((x.array() != y.array()).any()) identical = false;
    });
    CHECK(identical);
}

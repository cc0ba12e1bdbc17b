#include "vsum/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vsum {

namespace {

double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    return std::abs(analytic - numeric) / denom;
}

// Max relative error between the analytic gradient tensor and central finite
// differences taken entry by entry through `loss_at`.
template <typename Tensor, typename LossFn>
double check_tensor(Tensor& param, const Tensor& grad, double step, LossFn&& loss_at) {
    double worst = 0.0;
    for (Eigen::Index idx = 0; idx < param.size(); ++idx) {
        const double saved = param.data()[idx];
        param.data()[idx] = saved + step;
        const double hi = loss_at();
        param.data()[idx] = saved - step;
        const double lo = loss_at();
        param.data()[idx] = saved;
        const double numeric = (hi - lo) / (2.0 * step);
        worst = std::max(worst, relative_error(grad.data()[idx], numeric));
    }
    return worst;
}

} // namespace

GradCheckReport run_gradcheck(const GradCheckConfig& cfg) {
    GradCheckReport report;
    for (double beta : cfg.betas) {
        for (int inst = 0; inst < cfg.instances; ++inst) {
            const std::uint64_t inst_seed =
                Rng::mix(cfg.seed, static_cast<std::uint64_t>(inst) * 8 + (beta > 0.0 ? 1 : 0));
            Rng rng(inst_seed);
            GradCheckInstance rec;
            rec.seed = inst_seed;
            rec.beta = beta;
            auto draw = [&rng](int fixed, int lo, int hi) {
                return fixed > 0 ? fixed : static_cast<int>(rng.range(lo, hi));
            };
            rec.input_dim = draw(cfg.fixed_input_dim, 2, cfg.max_input_dim);
            rec.hidden_dim = draw(cfg.fixed_hidden_dim, 2, cfg.max_hidden_dim);
            rec.seq_len = draw(cfg.fixed_seq_len, 1, cfg.max_seq_len);
            rec.batch = draw(cfg.fixed_batch, 1, cfg.max_batch);

            AutoEncoderParams params = init_auto_encoder(rec.input_dim, rec.hidden_dim, rng);
            SequenceBatch batch(rec.batch);
            for (Sequence& seq : batch) {
                seq.resize(rec.seq_len);
                for (Vec& x : seq) {
                    x.resize(rec.input_dim);
                    for (int d = 0; d < rec.input_dim; ++d) x[d] = rng.uniform(-1.0, 1.0);
                }
            }

            const SparsityConfig sparsity{0.05, beta, 1e-6};
            Gradients grads = backward(params, batch, sparsity, Exec::Serial);
            if (cfg.corrupt) grads.encoder.w_ix(0, 0) += 1e-3;

            const auto loss_at = [&]() { return total_loss(params, batch, sparsity, Exec::Serial); };
            double worst = 0.0;
            zip_tensors(params, grads, [&](auto& p, const auto& g) {
                worst = std::max(worst, check_tensor(p, g, cfg.fd_step, loss_at));
            });
            rec.max_rel_err = worst;
            rec.pass = worst <= cfg.tolerance;
            report.max_rel_err = std::max(report.max_rel_err, worst);
            report.instances.push_back(rec);
        }
    }
    report.pass = std::all_of(report.instances.begin(), report.instances.end(),
                              [](const GradCheckInstance& r) { return r.pass; });
    return report;
}

std::string format_gradcheck_report(const GradCheckReport& report) {
    std::ostringstream out;
    for (const GradCheckInstance& r : report.instances) {
        out << (r.pass ? "ok  " : "FAIL") << "  beta=" << r.beta << " in=" << r.input_dim
            << " hidden=" << r.hidden_dim << " T=" << r.seq_len << " K=" << r.batch
            << " max_rel_err=" << r.max_rel_err << "\n";
    }
    out << (report.pass ? "gradcheck PASS" : "gradcheck FAIL")
        << " (max relative error " << report.max_rel_err << " over " << report.instances.size()
        << " instances)\n";
    return out.str();
}

} // namespace vsum

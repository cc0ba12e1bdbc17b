#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vsum/stack.hpp"

using namespace vsum;

namespace {

SequenceBatch random_batch(int n, int steps, int dim, std::uint64_t seed) {
    Rng rng(seed);
    SequenceBatch batch(n);
    for (Sequence& seq : batch) {
        seq.resize(steps);
        for (Vec& x : seq) {
            x.resize(dim);
            for (int d = 0; d < dim; ++d) x[d] = rng.uniform(-1.0, 1.0);
        }
    }
    return batch;
}

bool bitwise_equal(const Gradients& a, const Gradients& b) {
    bool equal = true;
    zip_tensors(a, b, [&equal](const auto& x, const auto& y) {
        if (x.rows() != y.rows() || x.cols() != y.cols() || (x.array() != y.array()).any())
            equal = false;
    });
    return equal;
}

} // namespace

TEST_CASE("serial and parallel backward agree bitwise") {
    const SparsityConfig cfg{0.05, 0.1, 1e-6};
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        Rng rng(seed);
        const AutoEncoderParams ae = init_auto_encoder(6, 5, rng);
        for (int n : {1, 3, 17, 40}) {
            const SequenceBatch batch = random_batch(n, 3, 6, seed * 100 + n);
            CHECK(bitwise_equal(backward(ae, batch, cfg, Exec::Serial),
                                backward(ae, batch, cfg, Exec::Parallel)));
        }
    }
}

TEST_CASE("serial and parallel total_loss agree bitwise") {
    const SparsityConfig cfg{0.05, 0.1, 1e-6};
    Rng rng(7);
    const AutoEncoderParams ae = init_auto_encoder(5, 4, rng);
    for (int n : {1, 2, 9, 33}) {
        const SequenceBatch batch = random_batch(n, 3, 5, 900 + n);
        const double serial = total_loss(ae, batch, cfg, Exec::Serial);
        const double parallel = total_loss(ae, batch, cfg, Exec::Parallel);
        CHECK(serial == parallel);
    }
}

TEST_CASE("serial and parallel clip scoring agree bitwise") {
    StackConfig cfg;
    cfg.input_dim = 6;
    cfg.hidden_dims = {5, 3, 2};
    const StackedModel model = init_stack(cfg);
    const SequenceBatch batch = random_batch(23, 3, 6, 42);
    const std::vector<double> serial = score_batch(model, batch, Exec::Serial);
    const std::vector<double> parallel = score_batch(model, batch, Exec::Parallel);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t k = 0; k < serial.size(); ++k) CHECK(serial[k] == parallel[k]);
}

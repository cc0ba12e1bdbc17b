// Compares the serial reference implementations of the batch kernels against
// the OpenMP versions and checks that both produce identical bits.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vsum/stack.hpp"

using namespace vsum;

namespace {

double ms_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

bool gradients_equal(const Gradients& a, const Gradients& b) {
    bool equal = true;
    zip_tensors(a, b, [&equal](const auto& x, const auto& y) {
        if (x.rows() != y.rows() || x.cols() != y.cols() || (x.array() != y.array()).any())
            equal = false;
    });
    return equal;
}

} // namespace

int main() {
    const int input_dim = 128;
    const int hidden_dim = 64;
    const int seq_len = 3;
    const int batch_size = 192;
    const int reps = 5;

    Rng rng(7);
    const AutoEncoderParams params = init_auto_encoder(input_dim, hidden_dim, rng);
    SequenceBatch batch(batch_size);
    for (Sequence& seq : batch) {
        seq.resize(seq_len);
        for (Vec& x : seq) {
            x.resize(input_dim);
            for (int d = 0; d < input_dim; ++d) x[d] = rng.uniform(-1.0, 1.0);
        }
    }
    const SparsityConfig sparsity{0.05, 0.1, 1e-6};

#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (compiled without OpenMP)\n");
#endif
    std::printf("batch backward, input=%d hidden=%d T=%d K=%d, %d reps\n", input_dim, hidden_dim,
                seq_len, batch_size, reps);

    Gradients serial = backward(params, batch, sparsity, Exec::Serial);
    Gradients parallel = backward(params, batch, sparsity, Exec::Parallel);
    if (!gradients_equal(serial, parallel)) {
        std::printf("MISMATCH: serial and parallel gradients differ\n");
        return 1;
    }

    auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) serial = backward(params, batch, sparsity, Exec::Serial);
    const double serial_ms = ms_since(t0) / reps;

    t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) parallel = backward(params, batch, sparsity, Exec::Parallel);
    const double parallel_ms = ms_since(t0) / reps;

    std::printf("  serial   %8.2f ms\n", serial_ms);
    std::printf("  parallel %8.2f ms  (speedup %.2fx)\n", parallel_ms, serial_ms / parallel_ms);

    StackConfig cfg;
    cfg.input_dim = input_dim;
    cfg.hidden_dims = {hidden_dim, hidden_dim / 2, hidden_dim / 4};
    const StackedModel model = init_stack(cfg);

    std::printf("batch scoring, %d clips across a 3-layer stack\n", batch_size);
    const std::vector<double> s1 = score_batch(model, batch, Exec::Serial);
    const std::vector<double> s2 = score_batch(model, batch, Exec::Parallel);
    if (s1 != s2) {
        std::printf("MISMATCH: serial and parallel scores differ\n");
        return 1;
    }
    t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) score_batch(model, batch, Exec::Serial);
    const double score_serial_ms = ms_since(t0) / reps;
    t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) score_batch(model, batch, Exec::Parallel);
    const double score_parallel_ms = ms_since(t0) / reps;
    std::printf("  serial   %8.2f ms\n", score_serial_ms);
    std::printf("  parallel %8.2f ms  (speedup %.2fx)\n", score_parallel_ms,
                score_serial_ms / score_parallel_ms);
    std::printf("bitwise agreement: OK\n");
    return 0;
}

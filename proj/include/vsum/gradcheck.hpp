#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vsum/model.hpp"

namespace vsum {

struct GradCheckConfig {
    int instances = 24;        // seeded random instances per beta value
    int max_input_dim = 8;     // dims drawn in [2, max]
    int max_hidden_dim = 8;
    int max_seq_len = 4;
    int max_batch = 3;
    // > 0 pins the corresponding dimension instead of drawing it
    int fixed_input_dim = 0;
    int fixed_hidden_dim = 0;
    int fixed_seq_len = 0;
    int fixed_batch = 0;
    double fd_step = 1e-5;     // central-difference step
    double tolerance = 1e-4;   // relative error bound
    std::vector<double> betas = {0.0, 0.1};
    std::uint64_t seed = 0;
    bool corrupt = false;      // test hook: perturb one gradient entry
};

struct GradCheckInstance {
    std::uint64_t seed = 0;
    double beta = 0.0;
    int input_dim = 0;
    int hidden_dim = 0;
    int seq_len = 0;
    int batch = 0;
    double max_rel_err = 0.0;
    bool pass = false;
};

struct GradCheckReport {
    std::vector<GradCheckInstance> instances;
    double max_rel_err = 0.0;
    bool pass = false;
};

// Compares backward() against central finite differences of total_loss on
// randomized small instances, entry by entry over every parameter tensor.
GradCheckReport run_gradcheck(const GradCheckConfig& cfg);

std::string format_gradcheck_report(const GradCheckReport& report);

} // namespace vsum

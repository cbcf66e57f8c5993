#pragma once

#include <cstdint>

#include "dtr/denoiser.hpp"

namespace dtr {

struct GradCheckReport {
    double max_rel_error = 0.0;
    int64_t n_params = 0;
};

// Compares analytic gradients against central finite differences of the
// forward loss (h = 1e-6, 64-bit) on a model whose parameters - including
// the zero-initialized layers - are re-randomized so no pathway is inert.
// Relative error uses a 1e-3 magnitude floor to keep the finite-difference
// noise floor out of the denominator.
GradCheckReport gradient_check(const DenoiserConfig& cfg, int batch, uint64_t seed);

}  // namespace dtr

#pragma once

#include <cstdint>

#include "dtr/denoiser.hpp"
#include "dtr/masks.hpp"
#include "dtr/schedule.hpp"

namespace dtr {

// Ancestral sampling over an evenly strided n_steps respacing of sched.
// Each step k applies
//   x_prev = (x - beta_k / sqrt(1 - abar_k) * eps_theta(x, t_k)) / sqrt(alpha_k)
//            + sigma_k * z,
// with sigma_k^2 = (1 - abar_{k-1}) / (1 - abar_k) * beta_k over the respaced
// coefficients, z ~ N(0, I) except at the final step where z = 0. The model
// (and mask bank) are queried with the original timestep t_k. Deterministic
// given the seed: the initial noise is drawn first, then one z per step,
// row-major within the batch.
MatRM ancestral_sample(const Denoiser& model, const MaskBank* bank, const NoiseSchedule& sched,
                       int n_steps, int n_samples, uint64_t seed);

}  // namespace dtr

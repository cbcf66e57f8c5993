#pragma once

#include <vector>

#include "dtr/linalg.hpp"

namespace dtr {

// Cumulative signal coefficients of the forward process. alpha_bar[0] = 1,
// strictly decreasing; alpha[t] = alpha_bar[t] / alpha_bar[t-1] and
// beta[t] = 1 - alpha[t] for t in 1..T.
struct NoiseSchedule {
    int T = 0;
    std::vector<double> alpha_bar;  // size T+1, index 0..T
    std::vector<double> alpha;      // size T+1, index 1..T used
    std::vector<double> beta;       // size T+1, index 1..T used

    // Original timestep carried by step k of a respaced schedule (identity
    // for a full schedule). Size T+1, index 1..T used.
    std::vector<int> timestep;

    void validate() const;
};

// alpha_bar[t] = f(t)/f(0), f(t) = cos^2(((t/T + s)/(1 + s)) * pi/2), s = 0.008,
// with per-step beta clamped to at most 0.999 and alpha_bar rebuilt as the
// cumulative product of the clamped per-step alphas.
NoiseSchedule cosine_schedule(int T);

// Evenly strided subsequence of n_steps timesteps ending at T (step k keeps
// original timestep floor(k*T/n_steps)); alpha_bar values are carried over at
// the retained indices and per-step alphas recomputed as ratios.
NoiseSchedule respace(const NoiseSchedule& sched, int n_steps);

// x_t = sqrt(alpha_bar[t]) * x0 + sqrt(1 - alpha_bar[t]) * eps
VecX q_sample(const VecX& x0, int t, const VecX& eps, const NoiseSchedule& sched);
MatRM q_sample_batch(const MatRM& x0, const std::vector<int>& t, const MatRM& eps,
                     const NoiseSchedule& sched);

// Mean over the batch of weight_i * mean-over-dims squared error.
double ddpm_loss(const MatRM& eps_true, const MatRM& eps_pred, const VecX& weights);

enum class WeightScheme { uniform, table };

// Per-timestep loss weight: uniform -> 1, table -> table[t-1].
double loss_weight(int t, WeightScheme scheme, const std::vector<double>& table = {});

}  // namespace dtr

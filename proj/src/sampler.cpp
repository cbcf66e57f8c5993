#include "dtr/sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "dtr/rng.hpp"

namespace dtr {

MatRM ancestral_sample(const Denoiser& model, const MaskBank* bank, const NoiseSchedule& sched,
                       int n_steps, int n_samples, uint64_t seed) {
    if (n_steps < 1 || n_steps > sched.T)
        throw std::invalid_argument("ancestral_sample: n_steps must be in [1, T]");
    if (n_samples < 1) throw std::invalid_argument("ancestral_sample: n_samples must be >= 1");

    const NoiseSchedule sub = respace(sched, n_steps);
    const int d = model.cfg.data_dim;
    auto eng = rng::make_engine(seed, "sampler");

    MatRM x(n_samples, d);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng::normal(eng);

    MatRM z(n_samples, d);
    for (int k = n_steps; k >= 1; --k) {
        const std::vector<int> t(size_t(n_samples), sub.timestep[k]);
        const MatRM eps = forward(model, x, t, bank);
        const double abar = sub.alpha_bar[k];
        const double abar_prev = sub.alpha_bar[k - 1];
        const double beta = sub.beta[k];
        const double coef = beta / std::sqrt(1.0 - abar);
        const double inv_sqrt_alpha = 1.0 / std::sqrt(sub.alpha[k]);
        x = inv_sqrt_alpha * (x - coef * eps);
        if (k > 1) {
            const double sigma = std::sqrt((1.0 - abar_prev) / (1.0 - abar) * beta);
            for (Eigen::Index i = 0; i < z.rows(); ++i)
                for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) = rng::normal(eng);
            x += sigma * z;
        }
    }
    return x;
}

}  // namespace dtr

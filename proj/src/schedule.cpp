#include "dtr/schedule.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dtr {

void NoiseSchedule::validate() const {
    if (T < 1) throw std::invalid_argument("schedule: T must be >= 1");
    if (int(alpha_bar.size()) != T + 1) throw std::invalid_argument("schedule: alpha_bar size mismatch");
    if (alpha_bar[0] != 1.0) throw std::invalid_argument("schedule: alpha_bar[0] must be 1");
    for (int t = 1; t <= T; ++t) {
        if (!(alpha_bar[t] > 0.0 && alpha_bar[t] < alpha_bar[t - 1]))
            throw std::invalid_argument("schedule: alpha_bar must be strictly decreasing in (0, 1]");
        if (!(beta[t] > 0.0 && beta[t] <= 0.999))
            throw std::invalid_argument("schedule: beta[" + std::to_string(t) + "] out of (0, 0.999]");
    }
}

NoiseSchedule cosine_schedule(int T) {
    if (T < 1) throw std::invalid_argument("cosine_schedule: T must be >= 1, got " + std::to_string(T));
    constexpr double s = 0.008;
    auto f = [&](double t) {
        const double u = (t / T + s) / (1.0 + s) * std::numbers::pi / 2.0;
        const double c = std::cos(u);
        return c * c;
    };
    NoiseSchedule sched;
    sched.T = T;
    sched.alpha_bar.assign(T + 1, 1.0);
    sched.alpha.assign(T + 1, 1.0);
    sched.beta.assign(T + 1, 0.0);
    sched.timestep.assign(T + 1, 0);
    const double f0 = f(0);
    double prev = 1.0;
    for (int t = 1; t <= T; ++t) {
        const double target = f(double(t)) / f0;
        const double b = std::min(1.0 - target / prev, 0.999);
        sched.beta[t] = b;
        sched.alpha[t] = 1.0 - b;
        sched.alpha_bar[t] = sched.alpha_bar[t - 1] * sched.alpha[t];
        prev = target;
        sched.timestep[t] = t;
    }
    return sched;
}

NoiseSchedule respace(const NoiseSchedule& sched, int n_steps) {
    if (n_steps < 1 || n_steps > sched.T)
        throw std::invalid_argument("respace: n_steps must be in [1, T], got " + std::to_string(n_steps));
    NoiseSchedule out;
    out.T = n_steps;
    out.alpha_bar.assign(n_steps + 1, 1.0);
    out.alpha.assign(n_steps + 1, 1.0);
    out.beta.assign(n_steps + 1, 0.0);
    out.timestep.assign(n_steps + 1, 0);
    for (int k = 1; k <= n_steps; ++k) {
        const int t = int((long long)(k) * sched.T / n_steps);
        out.timestep[k] = t;
        out.alpha_bar[k] = sched.alpha_bar[t];
        out.alpha[k] = out.alpha_bar[k] / out.alpha_bar[k - 1];
        out.beta[k] = 1.0 - out.alpha[k];
    }
    return out;
}

VecX q_sample(const VecX& x0, int t, const VecX& eps, const NoiseSchedule& sched) {
    if (t < 1 || t > sched.T)
        throw std::out_of_range("q_sample: t must be in [1, " + std::to_string(sched.T) + "], got " +
                                std::to_string(t));
    if (x0.size() != eps.size()) throw std::invalid_argument("q_sample: x0/eps dimension mismatch");
    const double ab = sched.alpha_bar[t];
    return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * eps;
}

MatRM q_sample_batch(const MatRM& x0, const std::vector<int>& t, const MatRM& eps,
                     const NoiseSchedule& sched) {
    if (x0.rows() != eps.rows() || x0.cols() != eps.cols())
        throw std::invalid_argument("q_sample_batch: x0/eps shape mismatch");
    if (int(t.size()) != x0.rows()) throw std::invalid_argument("q_sample_batch: t size mismatch");
    MatRM out(x0.rows(), x0.cols());
    for (Eigen::Index i = 0; i < x0.rows(); ++i) {
        if (t[i] < 1 || t[i] > sched.T)
            throw std::out_of_range("q_sample_batch: t out of range at row " + std::to_string(i));
        const double ab = sched.alpha_bar[t[i]];
        out.row(i) = std::sqrt(ab) * x0.row(i) + std::sqrt(1.0 - ab) * eps.row(i);
    }
    return out;
}

double ddpm_loss(const MatRM& eps_true, const MatRM& eps_pred, const VecX& weights) {
    if (eps_true.rows() != eps_pred.rows() || eps_true.cols() != eps_pred.cols())
        throw std::invalid_argument("ddpm_loss: prediction/target shape mismatch");
    if (weights.size() != eps_true.rows())
        throw std::invalid_argument("ddpm_loss: weights size mismatch");
    if ((weights.array() < 0.0).any()) throw std::invalid_argument("ddpm_loss: weights must be >= 0");
    const double dims = double(eps_true.cols());
    double total = 0.0;
    for (Eigen::Index i = 0; i < eps_true.rows(); ++i)
        total += weights[i] * (eps_pred.row(i) - eps_true.row(i)).squaredNorm() / dims;
    return total / double(eps_true.rows());
}

double loss_weight(int t, WeightScheme scheme, const std::vector<double>& table) {
    switch (scheme) {
        case WeightScheme::uniform: return 1.0;
        case WeightScheme::table:
            if (t < 1 || t > int(table.size()))
                throw std::invalid_argument("loss_weight: table has " + std::to_string(table.size()) +
                                            " entries, t = " + std::to_string(t));
            return table[t - 1];
    }
    throw std::logic_error("unreachable weight scheme");
}

}  // namespace dtr

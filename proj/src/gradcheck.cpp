#include "dtr/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "dtr/rng.hpp"
#include "dtr/schedule.hpp"

namespace dtr {

GradCheckReport gradient_check(const DenoiserConfig& cfg, int batch, uint64_t seed) {
    Denoiser model = build_denoiser(cfg, seed);

    // Zero-initialized layers block gradient flow through untouched paths;
    // randomize everything so the check exercises the full graph.
    auto eng = rng::make_engine(seed, "gradcheck");
    for (auto& tensor : model.params.tensors)
        for (double& v : tensor.data) v = 0.3 * rng::normal(eng);

    MaskSpec spec;
    spec.strategy = MaskStrategy::dtr;
    spec.T = 7;
    spec.C = cfg.width;
    spec.beta = 0.6;
    spec.alpha = 2.0;
    const MaskBank bank = make_dtr_mask(spec);
    const MaskBank* bank_ptr = cfg.routing_variant == RoutingVariant::none ? nullptr : &bank;

    MatRM x(batch, cfg.data_dim), eps_true(batch, cfg.data_dim);
    std::vector<int> t(static_cast<size_t>(batch));
    VecX weights(batch);
    for (int i = 0; i < batch; ++i) {
        t[size_t(i)] = 1 + int(rng::uniform_below(eng, uint64_t(spec.T)));
        weights[i] = 0.5 + rng::uniform01(eng);
        for (int j = 0; j < cfg.data_dim; ++j) {
            x(i, j) = rng::normal(eng);
            eps_true(i, j) = rng::normal(eng);
        }
    }

    const BackwardResult analytic = backward(model, x, t, bank_ptr, eps_true, weights);

    auto loss_at = [&]() {
        const MatRM pred = forward(model, x, t, bank_ptr);
        return ddpm_loss(eps_true, pred, weights);
    };

    constexpr double h = 1e-6;
    GradCheckReport report;
    for (int ti = 0; ti < model.params.count(); ++ti) {
        auto& tensor = model.params[ti];
        const auto& grad = analytic.grads[ti];
        for (size_t k = 0; k < tensor.data.size(); ++k) {
            const double saved = tensor.data[k];
            tensor.data[k] = saved + h;
            const double up = loss_at();
            tensor.data[k] = saved - h;
            const double down = loss_at();
            tensor.data[k] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double an = grad.data[k];
            const double rel = std::abs(fd - an) / std::max({1e-3, std::abs(fd), std::abs(an)});
            report.max_rel_error = std::max(report.max_rel_error, rel);
            ++report.n_params;
        }
    }
    return report;
}

}  // namespace dtr

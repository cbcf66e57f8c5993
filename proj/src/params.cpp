#include "dtr/params.hpp"

#include <cmath>
#include <stdexcept>

namespace dtr {

int ParamSet::add(std::string name, std::vector<int> dims) {
    if (index_of(name) >= 0) throw std::invalid_argument("duplicate tensor name '" + name + "'");
    int64_t n = 1;
    for (int d : dims) {
        if (d < 1) throw std::invalid_argument("tensor '" + name + "' has non-positive dim");
        n *= d;
    }
    NamedTensor t;
    t.name = std::move(name);
    t.dims = std::move(dims);
    t.data.assign(size_t(n), 0.0);
    tensors.push_back(std::move(t));
    return int(tensors.size()) - 1;
}

int ParamSet::index_of(std::string_view name) const {
    for (size_t i = 0; i < tensors.size(); ++i)
        if (tensors[i].name == name) return int(i);
    return -1;
}

int64_t ParamSet::total_size() const {
    int64_t n = 0;
    for (const auto& t : tensors) n += t.size();
    return n;
}

bool ParamSet::same_layout(const ParamSet& other) const {
    if (tensors.size() != other.tensors.size()) return false;
    for (size_t i = 0; i < tensors.size(); ++i)
        if (tensors[i].name != other.tensors[i].name || tensors[i].dims != other.tensors[i].dims)
            return false;
    return true;
}

void ParamSet::set_zero() {
    for (auto& t : tensors) std::fill(t.data.begin(), t.data.end(), 0.0);
}

ParamSet ParamSet::zeros_like() const {
    ParamSet out = *this;
    out.set_zero();
    return out;
}

TrainState make_train_state(ParamSet params) {
    TrainState state;
    state.ema = params;
    state.m = params.zeros_like();
    state.v = params.zeros_like();
    state.params = std::move(params);
    state.step = 0;
    return state;
}

void adam_step(TrainState& state, const ParamSet& grads, const AdamConfig& cfg) {
    if (!state.params.same_layout(grads))
        throw std::invalid_argument("adam_step: gradient layout does not match parameters");
    const double t = double(state.step + 1);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    for (int i = 0; i < state.params.count(); ++i) {
        auto p = state.params[i].vec();
        auto g = grads[i].vec();
        auto m = state.m[i].vec();
        auto v = state.v[i].vec();
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v.array().matrix() + (1.0 - cfg.beta2) * g.array().square().matrix();
        p.array() -= cfg.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.eps);
    }
    ++state.step;
}

void ema_update(TrainState& state, double decay) {
    if (!(decay >= 0.0 && decay < 1.0))
        throw std::invalid_argument("ema_update: decay must be in [0, 1)");
    for (int i = 0; i < state.params.count(); ++i) {
        auto e = state.ema[i].vec();
        auto p = state.params[i].vec();
        e = decay * e + (1.0 - decay) * p;
    }
}

}  // namespace dtr

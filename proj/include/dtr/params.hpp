#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dtr/linalg.hpp"

namespace dtr {

// One named flat array with a row-major shape.
struct NamedTensor {
    std::string name;
    std::vector<int> dims;
    std::vector<double> data;

    int64_t size() const { return int64_t(data.size()); }
    int rows() const { return dims.at(0); }
    int cols() const { return dims.at(1); }

    Eigen::Map<MatRM> mat() { return {data.data(), rows(), cols()}; }
    Eigen::Map<const MatRM> mat() const { return {data.data(), rows(), cols()}; }
    Eigen::Map<VecX> vec() { return {data.data(), Eigen::Index(data.size())}; }
    Eigen::Map<const VecX> vec() const { return {data.data(), Eigen::Index(data.size())}; }
};

// Ordered collection of named tensors; order is fixed at construction and
// shared by gradients, optimizer moments, and checkpoints.
struct ParamSet {
    std::vector<NamedTensor> tensors;

    int add(std::string name, std::vector<int> dims);
    int index_of(std::string_view name) const;  // -1 when missing
    NamedTensor& operator[](int i) { return tensors[size_t(i)]; }
    const NamedTensor& operator[](int i) const { return tensors[size_t(i)]; }
    int count() const { return int(tensors.size()); }
    int64_t total_size() const;
    bool same_layout(const ParamSet& other) const;
    void set_zero();

    // Same names/shapes, zero-filled values.
    ParamSet zeros_like() const;
};

// Parameters, their EMA shadow, and Adam moments. ema equals params exactly
// at step 0; moments start at zero.
struct TrainState {
    ParamSet params;
    ParamSet ema;
    ParamSet m;
    ParamSet v;
    uint64_t step = 0;
};

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

TrainState make_train_state(ParamSet params);

// Bias-corrected Adam update; increments state.step.
void adam_step(TrainState& state, const ParamSet& grads, const AdamConfig& cfg);

// ema <- decay * ema + (1 - decay) * params, elementwise for every tensor.
void ema_update(TrainState& state, double decay);

}  // namespace dtr

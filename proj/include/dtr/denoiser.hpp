#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dtr/linalg.hpp"
#include "dtr/masks.hpp"
#include "dtr/params.hpp"

namespace dtr {

// Where the routing mask enters each residual block.
//   none      - masks are never applied (blocks share the adm_style body)
//   adm_style - z + F(m (*) norm(z), temb), mask right after the block norm
//   dit_style - (1-m) (*) z + Inner(m (*) z), mask at block entry plus a
//               complementary-mask skip around the whole block
enum class RoutingVariant { none, adm_style, dit_style };

const char* to_string(RoutingVariant v);
RoutingVariant routing_variant_from_string(const std::string& s);

struct DenoiserConfig {
    int data_dim = 2;
    int width = 64;       // hidden channel count, the masked dimension
    int n_blocks = 4;
    RoutingVariant routing_variant = RoutingVariant::none;
    int temb_dim = 64;    // sinusoidal embedding size, must be even

    void validate() const;
};

// Post-block activations z^{l+1}, one (batch x width) matrix per block.
struct ActivationTrace {
    std::vector<MatRM> blocks;
    std::vector<int> timesteps;  // per-sample t of the recorded pass
};

void write_trace_csv(const ActivationTrace& trace, const std::string& path);

// Multiplication counter for the forward pass (linear layers, norms,
// activations, modulation, and mask products all counted).
struct OpCounter {
    unsigned long long mults = 0;
};

struct Denoiser {
    DenoiserConfig cfg;
    ParamSet params;

    struct AdmIdx {
        int w1, b1, wt, bt, w2, b2;
    };
    struct SubIdx {
        int mod_w, mod_b, w1, b1, w2, b2;
    };
    struct DitIdx {
        SubIdx f1, f2;
    };
    struct Indices {
        int embed_w, embed_b;
        int temb_w1, temb_b1, temb_w2, temb_b2;
        int head_w, head_b;
        std::vector<AdmIdx> adm;
        std::vector<DitIdx> dit;
    } idx;
};

// Network: linear embed (d -> C), n_blocks residual blocks, output norm,
// zero-initialized linear head (C -> d). Sinusoidal timestep embedding runs
// through a 2-layer MLP to width C and feeds every block. Final linears of
// the adm body and the modulation heads of the dit body start at zero, so
// every block is the identity map and the prediction is exactly zero at
// initialization.
Denoiser build_denoiser(const DenoiserConfig& cfg, uint64_t seed);

// Same skeleton, different parameter values (e.g. the EMA shadow).
Denoiser with_params(const Denoiser& model, ParamSet params);

int64_t parameter_count(const DenoiserConfig& cfg);

// Noise prediction for a batch with per-sample timesteps. bank == nullptr
// disables routing; with a bank, sample i uses mask row t[i] - 1.
MatRM forward(const Denoiser& model, const MatRM& x, const std::vector<int>& t,
              const MaskBank* bank, ActivationTrace* trace = nullptr, OpCounter* ops = nullptr);

struct BackwardResult {
    double loss = 0.0;
    MatRM eps_pred;
    ParamSet grads;  // same layout as model.params
};

// Exact reverse-mode gradients of the weighted noise-prediction loss.
BackwardResult backward(const Denoiser& model, const MatRM& x, const std::vector<int>& t,
                        const MaskBank* bank, const MatRM& eps_true, const VecX& loss_weights);

// ---- building blocks, exposed for verification --------------------------

struct AdmBlockView {
    Eigen::Map<const MatRM> w1, wt, w2;
    Eigen::Map<const VecX> b1, bt, b2;
};
struct DitSubFnView {
    Eigen::Map<const MatRM> mod_w, w1, w2;
    Eigen::Map<const VecX> mod_b, b1, b2;
};
struct DitBlockView {
    DitSubFnView f1, f2;
};

AdmBlockView adm_block_view(const Denoiser& model, int block);
DitBlockView dit_block_view(const Denoiser& model, int block);

// Non-affine layer normalization over channels (per row).
MatRM layer_norm(const MatRM& x);
MatRM silu(const MatRM& x);

// Sinusoidal embedding of integer timesteps, then the model's 2-layer MLP.
MatRM sinusoidal_embedding(const std::vector<int>& t, int dim);
MatRM timestep_embedding(const Denoiser& model, const std::vector<int>& t);

// F alone: linear, add temb projection, SiLU, final linear. Input is the
// already normalized (and masked) activation.
MatRM adm_residual_branch(const MatRM& v, const AdmBlockView& p, const MatRM& temb);

// z + F(mask (*) norm(z), temb); mask_row == nullptr skips the mask.
MatRM routed_block_adm(const MatRM& z, const uint8_t* mask_row, const AdmBlockView& p,
                       const MatRM& temb);

// Modulated sub-function: scale/shift/gate regressed from temb, applied to an
// already normalized input; the gate starts at zero.
MatRM dit_subfn(const MatRM& normed, const DitSubFnView& p, const MatRM& temb);

// u' + F2(norm2(u'), temb) with u' = u + F1(norm1(u), temb).
MatRM dit_inner_block(const MatRM& u, const DitBlockView& p, const MatRM& temb);

// (1 - m) (*) z + Inner(m (*) z); mask_row == nullptr gives plain Inner(z).
MatRM routed_block_dit(const MatRM& z, const uint8_t* mask_row, const DitBlockView& p,
                       const MatRM& temb);

}  // namespace dtr

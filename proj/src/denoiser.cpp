#include "dtr/denoiser.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "dtr/errors.hpp"
#include "dtr/rng.hpp"
#include "dtr/text.hpp"

namespace dtr {

namespace {

constexpr double kLnEps = 1e-5;

struct LnCache {
    VecX rstd;  // per row
    MatRM y;    // normalized output
};

LnCache layer_norm_cached(const MatRM& x) {
    LnCache c;
    const auto rows = x.rows();
    const auto cols = x.cols();
    c.rstd.resize(rows);
    c.y.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double mu = x.row(i).mean();
        const double var = (x.row(i).array() - mu).square().mean();
        const double rstd = 1.0 / std::sqrt(var + kLnEps);
        c.rstd[i] = rstd;
        c.y.row(i) = (x.row(i).array() - mu) * rstd;
    }
    return c;
}

// dL/dx for y = layer_norm(x), given dL/dy.
MatRM layer_norm_backward(const LnCache& c, const MatRM& dy) {
    MatRM dx(dy.rows(), dy.cols());
    for (Eigen::Index i = 0; i < dy.rows(); ++i) {
        const double m1 = dy.row(i).mean();
        const double m2 = (dy.row(i).array() * c.y.row(i).array()).mean();
        dx.row(i) = c.rstd[i] * (dy.row(i).array() - m1 - c.y.row(i).array() * m2);
    }
    return dx;
}

MatRM sigmoid(const MatRM& x) {
    return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

// d silu(x)/dx = sig(x) * (1 + x * (1 - sig(x)))
MatRM silu_grad(const MatRM& x, const MatRM& sig) {
    return (sig.array() * (1.0 + x.array() * (1.0 - sig.array()))).matrix();
}

void count_gemm(OpCounter* ops, Eigen::Index rows, Eigen::Index out, Eigen::Index in) {
    if (ops) ops->mults += 1ull * rows * out * in;
}
void count_elem(OpCounter* ops, Eigen::Index rows, Eigen::Index cols, int per_element) {
    if (ops) ops->mults += 1ull * rows * cols * per_element;
}

struct SubFnCache {
    MatRM gamma, shift, gate;
    MatRM hin, p, sig, hs, q, out;
};

struct AdmBlockCache {
    LnCache ln;
    MatRM v;       // masked normalized input (input to w1)
    MatRM h, sig;  // pre-activation and its sigmoid
    MatRM a;       // silu(h)
    MatRM z_out;
};

struct DitBlockCache {
    MatRM x;  // masked block input
    LnCache ln1, ln2;
    SubFnCache s1, s2;
    MatRM u1, u2, z_out;
};

struct ForwardCache {
    MatRM te, th, tsig, ts, e;  // sinusoid, MLP pre-act, sigmoid, silu, embedding
    MatRM z0;
    MatRM mask;  // batch mask matrix, empty when routing is off
    std::vector<AdmBlockCache> adm;
    std::vector<DitBlockCache> dit;
    LnCache out_ln;
    MatRM eps_pred;
};

bool routing_active(const Denoiser& model, const MaskBank* bank) {
    return bank != nullptr && model.cfg.routing_variant != RoutingVariant::none;
}

MatRM batch_mask(const MaskBank& bank, const std::vector<int>& t) {
    MatRM m(Eigen::Index(t.size()), bank.spec.C);
    for (size_t i = 0; i < t.size(); ++i) {
        const uint8_t* row = bank.row(t[i] - 1);
        for (int c = 0; c < bank.spec.C; ++c) m(Eigen::Index(i), c) = double(row[c]);
    }
    return m;
}

SubFnCache subfn_cached(const MatRM& normed, const DitSubFnView& p, const MatRM& e,
                        OpCounter* ops) {
    const auto b = normed.rows();
    const auto c = normed.cols();
    SubFnCache s;
    MatRM mod = e * p.mod_w.transpose();
    mod.rowwise() += p.mod_b.transpose();
    count_gemm(ops, b, 3 * c, e.cols());
    s.gamma = mod.leftCols(c);
    s.shift = mod.middleCols(c, c);
    s.gate = mod.rightCols(c);
    s.hin = (normed.array() * (1.0 + s.gamma.array()) + s.shift.array()).matrix();
    count_elem(ops, b, c, 1);
    s.p = s.hin * p.w1.transpose();
    s.p.rowwise() += p.b1.transpose();
    count_gemm(ops, b, c, c);
    s.sig = sigmoid(s.p);
    s.hs = (s.p.array() * s.sig.array()).matrix();
    count_elem(ops, b, c, 2);
    s.q = s.hs * p.w2.transpose();
    s.q.rowwise() += p.b2.transpose();
    count_gemm(ops, b, c, c);
    s.out = (s.q.array() * s.gate.array()).matrix();
    count_elem(ops, b, c, 1);
    return s;
}

// Returns dL/d normed and accumulates parameter/temb gradients.
MatRM subfn_backward(const SubFnCache& s, const MatRM& normed, const DitSubFnView& p,
                     const MatRM& e, const MatRM& dout, ParamSet& grads,
                     const Denoiser::SubIdx& gi, MatRM& de) {
    const auto c = normed.cols();
    MatRM dq = (dout.array() * s.gate.array()).matrix();
    MatRM dgate = (dout.array() * s.q.array()).matrix();

    grads[gi.w2].mat() += dq.transpose() * s.hs;
    grads[gi.b2].vec() += dq.colwise().sum().transpose();
    MatRM dhs = dq * p.w2;

    MatRM dp = (dhs.array() * silu_grad(s.p, s.sig).array()).matrix();
    grads[gi.w1].mat() += dp.transpose() * s.hin;
    grads[gi.b1].vec() += dp.colwise().sum().transpose();
    MatRM dhin = dp * p.w1;

    MatRM dnormed = (dhin.array() * (1.0 + s.gamma.array())).matrix();
    MatRM dgamma = (dhin.array() * normed.array()).matrix();
    MatRM dmod(dout.rows(), 3 * c);
    dmod.leftCols(c) = dgamma;
    dmod.middleCols(c, c) = dhin;  // shift gradient
    dmod.rightCols(c) = dgate;

    grads[gi.mod_w].mat() += dmod.transpose() * e;
    grads[gi.mod_b].vec() += dmod.colwise().sum().transpose();
    de += dmod * p.mod_w;
    return dnormed;
}

ForwardCache run_forward(const Denoiser& model, const MatRM& x, const std::vector<int>& t,
                         const MaskBank* bank, ActivationTrace* trace, OpCounter* ops) {
    const auto& cfg = model.cfg;
    if (x.cols() != cfg.data_dim)
        throw std::invalid_argument("forward: input has " + std::to_string(x.cols()) +
                                    " dims, model expects " + std::to_string(cfg.data_dim));
    if (Eigen::Index(t.size()) != x.rows())
        throw std::invalid_argument("forward: one timestep per sample required");
    for (int ti : t)
        if (ti < 1) throw std::out_of_range("forward: timesteps must be >= 1");
    if (bank != nullptr) {
        if (bank->spec.C != cfg.width)
            throw std::invalid_argument("forward: mask bank width " + std::to_string(bank->spec.C) +
                                        " != model width " + std::to_string(cfg.width));
        for (int ti : t)
            if (ti > bank->spec.T)
                throw std::out_of_range("forward: timestep exceeds bank T = " +
                                        std::to_string(bank->spec.T));
    }

    const auto b = x.rows();
    const int c = cfg.width;
    const bool routed = routing_active(model, bank);
    const auto& ps = model.params;
    const auto& ix = model.idx;

    ForwardCache f;
    if (routed) f.mask = batch_mask(*bank, t);

    f.te = sinusoidal_embedding(t, cfg.temb_dim);
    count_elem(ops, b, cfg.temb_dim / 2, 1);
    f.th = f.te * ps[ix.temb_w1].mat().transpose();
    f.th.rowwise() += ps[ix.temb_b1].vec().transpose();
    count_gemm(ops, b, c, cfg.temb_dim);
    f.tsig = sigmoid(f.th);
    f.ts = (f.th.array() * f.tsig.array()).matrix();
    count_elem(ops, b, c, 2);
    f.e = f.ts * ps[ix.temb_w2].mat().transpose();
    f.e.rowwise() += ps[ix.temb_b2].vec().transpose();
    count_gemm(ops, b, c, c);

    f.z0 = x * ps[ix.embed_w].mat().transpose();
    f.z0.rowwise() += ps[ix.embed_b].vec().transpose();
    count_gemm(ops, b, c, cfg.data_dim);

    if (trace) {
        trace->blocks.clear();
        trace->timesteps = t;
    }

    MatRM z = f.z0;
    if (cfg.routing_variant == RoutingVariant::dit_style) {
        f.dit.resize(cfg.n_blocks);
        for (int l = 0; l < cfg.n_blocks; ++l) {
            auto& blk = f.dit[size_t(l)];
            const auto view = dit_block_view(model, l);
            if (routed) {
                blk.x = (z.array() * f.mask.array()).matrix();
                count_elem(ops, b, c, 1);
            } else {
                blk.x = z;
            }
            blk.ln1 = layer_norm_cached(blk.x);
            count_elem(ops, b, c, 2);
            blk.s1 = subfn_cached(blk.ln1.y, view.f1, f.e, ops);
            blk.u1 = blk.x + blk.s1.out;
            blk.ln2 = layer_norm_cached(blk.u1);
            count_elem(ops, b, c, 2);
            blk.s2 = subfn_cached(blk.ln2.y, view.f2, f.e, ops);
            blk.u2 = blk.u1 + blk.s2.out;
            if (routed) {
                blk.z_out = ((1.0 - f.mask.array()) * z.array()).matrix() + blk.u2;
                count_elem(ops, b, c, 1);
            } else {
                blk.z_out = blk.u2;
            }
            z = blk.z_out;
            if (trace) trace->blocks.push_back(z);
        }
    } else {
        f.adm.resize(cfg.n_blocks);
        for (int l = 0; l < cfg.n_blocks; ++l) {
            auto& blk = f.adm[size_t(l)];
            const auto view = adm_block_view(model, l);
            blk.ln = layer_norm_cached(z);
            count_elem(ops, b, c, 2);
            if (routed) {
                blk.v = (blk.ln.y.array() * f.mask.array()).matrix();
                count_elem(ops, b, c, 1);
            } else {
                blk.v = blk.ln.y;
            }
            blk.h = blk.v * view.w1.transpose();
            blk.h.rowwise() += view.b1.transpose();
            count_gemm(ops, b, c, c);
            blk.h += f.e * view.wt.transpose();
            blk.h.rowwise() += view.bt.transpose();
            count_gemm(ops, b, c, c);
            blk.sig = sigmoid(blk.h);
            blk.a = (blk.h.array() * blk.sig.array()).matrix();
            count_elem(ops, b, c, 2);
            blk.z_out = z + blk.a * view.w2.transpose();
            blk.z_out.rowwise() += view.b2.transpose();
            count_gemm(ops, b, c, c);
            z = blk.z_out;
            if (trace) trace->blocks.push_back(z);
        }
    }

    f.out_ln = layer_norm_cached(z);
    count_elem(ops, b, c, 2);
    f.eps_pred = f.out_ln.y * ps[ix.head_w].mat().transpose();
    f.eps_pred.rowwise() += ps[ix.head_b].vec().transpose();
    count_gemm(ops, b, cfg.data_dim, c);
    return f;
}

}  // namespace

const char* to_string(RoutingVariant v) {
    switch (v) {
        case RoutingVariant::none: return "none";
        case RoutingVariant::adm_style: return "adm_style";
        case RoutingVariant::dit_style: return "dit_style";
    }
    throw std::logic_error("unreachable routing variant");
}

RoutingVariant routing_variant_from_string(const std::string& s) {
    if (s == "none") return RoutingVariant::none;
    if (s == "adm_style") return RoutingVariant::adm_style;
    if (s == "dit_style") return RoutingVariant::dit_style;
    throw std::invalid_argument("unknown routing variant '" + s +
                                "' (expected none|adm_style|dit_style)");
}

void DenoiserConfig::validate() const {
    if (data_dim < 1) throw std::invalid_argument("denoiser: data_dim must be >= 1");
    if (width < 1) throw std::invalid_argument("denoiser: width must be >= 1");
    if (n_blocks < 1) throw std::invalid_argument("denoiser: n_blocks must be >= 1");
    if (temb_dim < 2 || temb_dim % 2 != 0)
        throw std::invalid_argument("denoiser: temb_dim must be even and >= 2");
}

namespace {

Denoiser make_skeleton(const DenoiserConfig& cfg) {
    cfg.validate();
    Denoiser model;
    model.cfg = cfg;
    auto& ps = model.params;
    auto& ix = model.idx;
    const int c = cfg.width;

    ix.embed_w = ps.add("embed.w", {c, cfg.data_dim});
    ix.embed_b = ps.add("embed.b", {c});
    ix.temb_w1 = ps.add("temb.w1", {c, cfg.temb_dim});
    ix.temb_b1 = ps.add("temb.b1", {c});
    ix.temb_w2 = ps.add("temb.w2", {c, c});
    ix.temb_b2 = ps.add("temb.b2", {c});

    for (int l = 0; l < cfg.n_blocks; ++l) {
        const std::string prefix = "block" + std::to_string(l) + ".";
        if (cfg.routing_variant == RoutingVariant::dit_style) {
            Denoiser::DitIdx d;
            auto sub = [&](const std::string& f) {
                Denoiser::SubIdx s;
                s.mod_w = ps.add(prefix + f + ".mod_w", {3 * c, c});
                s.mod_b = ps.add(prefix + f + ".mod_b", {3 * c});
                s.w1 = ps.add(prefix + f + ".w1", {c, c});
                s.b1 = ps.add(prefix + f + ".b1", {c});
                s.w2 = ps.add(prefix + f + ".w2", {c, c});
                s.b2 = ps.add(prefix + f + ".b2", {c});
                return s;
            };
            d.f1 = sub("f1");
            d.f2 = sub("f2");
            model.idx.dit.push_back(d);
        } else {
            Denoiser::AdmIdx a;
            a.w1 = ps.add(prefix + "w1", {c, c});
            a.b1 = ps.add(prefix + "b1", {c});
            a.wt = ps.add(prefix + "wt", {c, c});
            a.bt = ps.add(prefix + "bt", {c});
            a.w2 = ps.add(prefix + "w2", {c, c});
            a.b2 = ps.add(prefix + "b2", {c});
            model.idx.adm.push_back(a);
        }
    }

    ix.head_w = ps.add("head.w", {cfg.data_dim, c});
    ix.head_b = ps.add("head.b", {cfg.data_dim});
    return model;
}

// Weight matrices drawn from N(0, 1/fan_in) except the layers that must
// start at zero for identity initialization; biases start at zero.
void init_params(Denoiser& model, uint64_t seed) {
    auto eng = rng::make_engine(seed, "init");
    auto fill = [&](int idx) {
        auto& t = model.params[idx];
        const double scale = 1.0 / std::sqrt(double(t.dims.back()));
        for (double& v : t.data) v = rng::normal(eng) * scale;
    };
    fill(model.idx.embed_w);
    fill(model.idx.temb_w1);
    fill(model.idx.temb_w2);
    for (const auto& a : model.idx.adm) {
        fill(a.w1);
        fill(a.wt);
        // a.w2 stays zero: block output is the identity at init
    }
    for (const auto& d : model.idx.dit) {
        // modulation heads stay zero: gate 0 makes each sub-function vanish
        fill(d.f1.w1);
        fill(d.f1.w2);
        fill(d.f2.w1);
        fill(d.f2.w2);
    }
    // head.w stays zero: prediction is exactly zero at init
}

}  // namespace

Denoiser build_denoiser(const DenoiserConfig& cfg, uint64_t seed) {
    Denoiser model = make_skeleton(cfg);
    init_params(model, seed);
    return model;
}

Denoiser with_params(const Denoiser& model, ParamSet params) {
    if (!model.params.same_layout(params))
        throw std::invalid_argument("with_params: layout mismatch");
    Denoiser out = model;
    out.params = std::move(params);
    return out;
}

int64_t parameter_count(const DenoiserConfig& cfg) {
    return make_skeleton(cfg).params.total_size();
}

AdmBlockView adm_block_view(const Denoiser& model, int block) {
    if (model.cfg.routing_variant == RoutingVariant::dit_style)
        throw std::invalid_argument("adm_block_view: model has dit-style blocks");
    const auto& a = model.idx.adm.at(size_t(block));
    const auto& ps = model.params;
    return AdmBlockView{ps[a.w1].mat(), ps[a.wt].mat(), ps[a.w2].mat(),
                        ps[a.b1].vec(), ps[a.bt].vec(), ps[a.b2].vec()};
}

DitBlockView dit_block_view(const Denoiser& model, int block) {
    if (model.cfg.routing_variant != RoutingVariant::dit_style)
        throw std::invalid_argument("dit_block_view: model has adm-style blocks");
    const auto& d = model.idx.dit.at(size_t(block));
    const auto& ps = model.params;
    auto sub = [&](const Denoiser::SubIdx& s) {
        return DitSubFnView{ps[s.mod_w].mat(), ps[s.w1].mat(), ps[s.w2].mat(),
                            ps[s.mod_b].vec(), ps[s.b1].vec(), ps[s.b2].vec()};
    };
    return DitBlockView{sub(d.f1), sub(d.f2)};
}

MatRM layer_norm(const MatRM& x) {
    return layer_norm_cached(x).y;
}

MatRM silu(const MatRM& x) {
    return (x.array() * (1.0 / (1.0 + (-x.array()).exp()))).matrix();
}

MatRM sinusoidal_embedding(const std::vector<int>& t, int dim) {
    if (dim < 2 || dim % 2 != 0) throw std::invalid_argument("sinusoidal_embedding: dim must be even");
    const int half = dim / 2;
    MatRM out(Eigen::Index(t.size()), dim);
    for (size_t i = 0; i < t.size(); ++i) {
        for (int k = 0; k < half; ++k) {
            const double freq = std::exp(-std::log(10000.0) * double(k) / double(half));
            const double arg = double(t[i]) * freq;
            out(Eigen::Index(i), k) = std::sin(arg);
            out(Eigen::Index(i), half + k) = std::cos(arg);
        }
    }
    return out;
}

MatRM timestep_embedding(const Denoiser& model, const std::vector<int>& t) {
    const auto& ps = model.params;
    const auto& ix = model.idx;
    MatRM te = sinusoidal_embedding(t, model.cfg.temb_dim);
    MatRM h = te * ps[ix.temb_w1].mat().transpose();
    h.rowwise() += ps[ix.temb_b1].vec().transpose();
    MatRM e = silu(h) * ps[ix.temb_w2].mat().transpose();
    e.rowwise() += ps[ix.temb_b2].vec().transpose();
    return e;
}

MatRM adm_residual_branch(const MatRM& v, const AdmBlockView& p, const MatRM& temb) {
    MatRM h = v * p.w1.transpose();
    h.rowwise() += p.b1.transpose();
    h += temb * p.wt.transpose();
    h.rowwise() += p.bt.transpose();
    MatRM out = silu(h) * p.w2.transpose();
    out.rowwise() += p.b2.transpose();
    return out;
}

MatRM routed_block_adm(const MatRM& z, const uint8_t* mask_row, const AdmBlockView& p,
                       const MatRM& temb) {
    MatRM v = layer_norm(z);
    if (mask_row) {
        for (Eigen::Index j = 0; j < v.cols(); ++j)
            if (!mask_row[j]) v.col(j).setZero();
    }
    return z + adm_residual_branch(v, p, temb);
}

MatRM dit_subfn(const MatRM& normed, const DitSubFnView& p, const MatRM& temb) {
    MatRM mod = temb * p.mod_w.transpose();
    mod.rowwise() += p.mod_b.transpose();
    const auto c = normed.cols();
    MatRM hin = (normed.array() * (1.0 + mod.leftCols(c).array()) + mod.middleCols(c, c).array()).matrix();
    MatRM h = hin * p.w1.transpose();
    h.rowwise() += p.b1.transpose();
    MatRM q = silu(h) * p.w2.transpose();
    q.rowwise() += p.b2.transpose();
    return (q.array() * mod.rightCols(c).array()).matrix();
}

MatRM dit_inner_block(const MatRM& u, const DitBlockView& p, const MatRM& temb) {
    MatRM u1 = u + dit_subfn(layer_norm(u), p.f1, temb);
    return u1 + dit_subfn(layer_norm(u1), p.f2, temb);
}

MatRM routed_block_dit(const MatRM& z, const uint8_t* mask_row, const DitBlockView& p,
                       const MatRM& temb) {
    if (!mask_row) return dit_inner_block(z, p, temb);
    MatRM x = z;
    MatRM skip = z;
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        if (mask_row[j])
            skip.col(j).setZero();
        else
            x.col(j).setZero();
    }
    return skip + dit_inner_block(x, p, temb);
}

MatRM forward(const Denoiser& model, const MatRM& x, const std::vector<int>& t,
              const MaskBank* bank, ActivationTrace* trace, OpCounter* ops) {
    return run_forward(model, x, t, bank, trace, ops).eps_pred;
}

BackwardResult backward(const Denoiser& model, const MatRM& x, const std::vector<int>& t,
                        const MaskBank* bank, const MatRM& eps_true, const VecX& loss_weights) {
    ForwardCache f = run_forward(model, x, t, bank, nullptr, nullptr);
    const auto& cfg = model.cfg;
    const auto& ix = model.idx;
    const auto b = x.rows();
    const bool routed = routing_active(model, bank);

    BackwardResult result;
    result.eps_pred = f.eps_pred;
    result.grads = model.params.zeros_like();
    auto& g = result.grads;

    if (eps_true.rows() != b || eps_true.cols() != cfg.data_dim)
        throw std::invalid_argument("backward: eps_true shape mismatch");
    if (loss_weights.size() != b) throw std::invalid_argument("backward: loss_weights size mismatch");

    // loss = (1/B) sum_i w_i * |pred_i - true_i|^2 / d
    const double dims = double(cfg.data_dim);
    double loss = 0.0;
    MatRM deps(b, cfg.data_dim);
    for (Eigen::Index i = 0; i < b; ++i) {
        const auto diff = (f.eps_pred.row(i) - eps_true.row(i)).eval();
        loss += loss_weights[i] * diff.squaredNorm() / dims;
        deps.row(i) = (2.0 * loss_weights[i] / (dims * double(b))) * diff;
    }
    result.loss = loss / double(b);

    // head
    g[ix.head_w].mat() += deps.transpose() * f.out_ln.y;
    g[ix.head_b].vec() += deps.colwise().sum().transpose();
    MatRM dzn = deps * model.params[ix.head_w].mat();
    MatRM dz = layer_norm_backward(f.out_ln, dzn);

    MatRM de = MatRM::Zero(b, cfg.width);

    if (cfg.routing_variant == RoutingVariant::dit_style) {
        for (int l = cfg.n_blocks - 1; l >= 0; --l) {
            const auto& blk = f.dit[size_t(l)];
            const auto view = dit_block_view(model, l);
            const auto& di = ix.dit[size_t(l)];

            MatRM dz_skip;
            if (routed) dz_skip = ((1.0 - f.mask.array()) * dz.array()).matrix();
            MatRM du2 = dz;

            MatRM du1 = du2;
            MatRM dn2 = subfn_backward(blk.s2, blk.ln2.y, view.f2, f.e, du2, g, di.f2, de);
            du1 += layer_norm_backward(blk.ln2, dn2);

            MatRM dx = du1;
            MatRM dn1 = subfn_backward(blk.s1, blk.ln1.y, view.f1, f.e, du1, g, di.f1, de);
            dx += layer_norm_backward(blk.ln1, dn1);

            if (routed)
                dz = dz_skip + (f.mask.array() * dx.array()).matrix();
            else
                dz = dx;
        }
    } else {
        for (int l = cfg.n_blocks - 1; l >= 0; --l) {
            const auto& blk = f.adm[size_t(l)];
            const auto view = adm_block_view(model, l);
            const auto& ai = ix.adm[size_t(l)];

            // z_out = z + silu(h) * w2^T + b2
            MatRM da = dz * model.params[ai.w2].mat();
            g[ai.w2].mat() += dz.transpose() * blk.a;
            g[ai.b2].vec() += dz.colwise().sum().transpose();

            MatRM dh = (da.array() * silu_grad(blk.h, blk.sig).array()).matrix();
            g[ai.w1].mat() += dh.transpose() * blk.v;
            g[ai.b1].vec() += dh.colwise().sum().transpose();
            g[ai.wt].mat() += dh.transpose() * f.e;
            g[ai.bt].vec() += dh.colwise().sum().transpose();
            de += dh * view.wt;

            MatRM dv = dh * view.w1;
            MatRM du = routed ? MatRM((dv.array() * f.mask.array()).matrix()) : dv;
            dz += layer_norm_backward(blk.ln, du);
        }
    }

    // embed
    g[ix.embed_w].mat() += dz.transpose() * x;
    g[ix.embed_b].vec() += dz.colwise().sum().transpose();

    // timestep embedding MLP
    MatRM dts = de * model.params[ix.temb_w2].mat();
    g[ix.temb_w2].mat() += de.transpose() * f.ts;
    g[ix.temb_b2].vec() += de.colwise().sum().transpose();
    MatRM dth = (dts.array() * silu_grad(f.th, f.tsig).array()).matrix();
    g[ix.temb_w1].mat() += dth.transpose() * f.te;
    g[ix.temb_b1].vec() += dth.colwise().sum().transpose();

    return result;
}

void write_trace_csv(const ActivationTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    for (size_t l = 0; l < trace.blocks.size(); ++l) {
        const auto& m = trace.blocks[l];
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            out << l << ',' << trace.timesteps[size_t(i)];
            for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << text::format_double(m(i, j));
            out << '\n';
        }
    }
    if (!out) throw io_error("write failed for '" + path + "'");
}

}  // namespace dtr

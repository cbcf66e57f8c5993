#include "dtr/cka.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "dtr/errors.hpp"
#include "dtr/rng.hpp"

namespace dtr {

double linear_cka(const MatRM& x, const MatRM& y) {
    if (x.rows() != y.rows()) throw std::invalid_argument("linear_cka: row counts differ");
    if (x.rows() < 2) throw std::invalid_argument("linear_cka: need at least 2 rows");
    MatRM xc = x.rowwise() - x.colwise().mean();
    MatRM yc = y.rowwise() - y.colwise().mean();
    const double cross = (xc.transpose() * yc).squaredNorm();
    const double nx = (xc.transpose() * xc).norm();
    const double ny = (yc.transpose() * yc).norm();
    if (nx == 0.0 || ny == 0.0) return 0.0;
    return cross / (nx * ny);
}

CKAMatrix cka_timestep_matrix(const Denoiser& model, const MaskBank* bank,
                              const NoiseSchedule& sched, const MatRM& x0,
                              const std::vector<int>& timesteps, int block, uint64_t seed) {
    if (block < 0 || block >= model.cfg.n_blocks)
        throw std::invalid_argument("cka_timestep_matrix: block out of range");
    if (x0.rows() < 2) throw std::invalid_argument("cka_timestep_matrix: batch size must be >= 2");
    for (int t : timesteps)
        if (t < 1 || t > sched.T)
            throw std::invalid_argument("cka_timestep_matrix: probe timestep out of range");

    // One noise draw shared by every probe, so traces differ only through the
    // model's timestep behavior.
    auto eng = rng::make_engine(seed, "cka-noise");
    MatRM eps(x0.rows(), x0.cols());
    for (Eigen::Index i = 0; i < eps.rows(); ++i)
        for (Eigen::Index j = 0; j < eps.cols(); ++j) eps(i, j) = rng::normal(eng);

    const int k = int(timesteps.size());
    std::vector<MatRM> traces;
    traces.reserve(size_t(k));
    for (int a = 0; a < k; ++a) {
        const std::vector<int> t(size_t(x0.rows()), timesteps[size_t(a)]);
        const MatRM xt = q_sample_batch(x0, t, eps, sched);
        ActivationTrace trace;
        forward(model, xt, t, bank, &trace);
        traces.push_back(std::move(trace.blocks[size_t(block)]));
    }

    CKAMatrix out;
    out.block = block;
    out.timesteps = timesteps;
    out.values.resize(k, k);
    for (int a = 0; a < k; ++a) {
        out.values(a, a) = linear_cka(traces[size_t(a)], traces[size_t(a)]);
        for (int b = a + 1; b < k; ++b) {
            const double v = linear_cka(traces[size_t(a)], traces[size_t(b)]);
            out.values(a, b) = v;
            out.values(b, a) = v;
        }
    }
    return out;
}

std::vector<int> default_probe_timesteps(int T, int k) {
    if (k < 1 || k > T) throw std::invalid_argument("default_probe_timesteps: k must be in [1, T]");
    std::vector<int> out(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) out[size_t(i)] = int((long long)(i + 1) * T / k);
    return out;
}

void write_cka_csv(const CKAMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << m.block;
    for (int t : m.timesteps) out << ',' << t;
    out << '\n';
    char buf[64];
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
            const double v = std::clamp(m.values(i, j), 0.0, 1.0);
            std::snprintf(buf, sizeof(buf), "%.10g", v);
            if (j) out << ',';
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw io_error("write failed for '" + path + "'");
}

void mask_heatmap_export(const MaskBank& bank, const std::string& path) {
    write_mask_pgm(bank, path);
}

void overlap_heatmap_export(const MaskBank& bank, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    const auto m = overlap_matrix(bank);
    const int T = bank.spec.T;
    out << "P2\n" << T << ' ' << T << '\n' << bank.spec.active_channels() << '\n';
    for (int i = 0; i < T; ++i) {
        for (int j = 0; j < T; ++j) {
            if (j) out << ' ';
            out << m[size_t(i) * T + j];
        }
        out << '\n';
    }
    if (!out) throw io_error("write failed for '" + path + "'");
}

}  // namespace dtr

#include "dtr/swd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dtr/rng.hpp"

namespace dtr {

namespace {

// Quantile function of a sorted sample with nodes at (i + 0.5)/n, linear
// between nodes, clamped at the extremes.
double quantile(const std::vector<double>& sorted, double q) {
    const size_t n = sorted.size();
    const double pos = q * double(n) - 0.5;
    if (pos <= 0.0) return sorted.front();
    if (pos >= double(n - 1)) return sorted.back();
    const size_t lo = size_t(pos);
    const double frac = pos - double(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

double wasserstein1(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein1: empty sample set");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a.size() == b.size()) {
        double total = 0.0;
        for (size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
        return total / double(a.size());
    }
    const size_t k = std::max(a.size(), b.size());
    double total = 0.0;
    for (size_t j = 0; j < k; ++j) {
        const double q = (double(j) + 0.5) / double(k);
        total += std::abs(quantile(a, q) - quantile(b, q));
    }
    return total / double(k);
}

double evaluate_swd(const MatRM& samples, const MatRM& reference, int n_proj, uint64_t seed) {
    if (samples.cols() != reference.cols())
        throw std::invalid_argument("evaluate_swd: dimension mismatch");
    if (samples.rows() < 1 || reference.rows() < 1)
        throw std::invalid_argument("evaluate_swd: empty sample set");
    if (n_proj < 1) throw std::invalid_argument("evaluate_swd: n_proj must be >= 1");

    const int d = int(samples.cols());
    auto eng = rng::make_engine(seed, "swd-projections");
    std::vector<double> pa(size_t(samples.rows()));
    std::vector<double> pb(size_t(reference.rows()));
    VecX dir(d);

    double total = 0.0;
    for (int p = 0; p < n_proj; ++p) {
        double norm = 0.0;
        do {
            for (int j = 0; j < d; ++j) dir[j] = rng::normal(eng);
            norm = dir.norm();
        } while (norm == 0.0);
        dir /= norm;
        for (Eigen::Index i = 0; i < samples.rows(); ++i) pa[size_t(i)] = samples.row(i).dot(dir);
        for (Eigen::Index i = 0; i < reference.rows(); ++i) pb[size_t(i)] = reference.row(i).dot(dir);
        total += wasserstein1(pa, pb);
    }
    return total / double(n_proj);
}

}  // namespace dtr

#include "dtr/swd.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dtr/rng.hpp"

using namespace dtr;

namespace {

MatRM gaussian_cloud(int n, int d, double shift_x, uint64_t seed) {
    auto eng = rng::make_engine(seed, "cloud");
    MatRM m(n, d);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = rng::normal(eng) + (j == 0 ? shift_x : 0.0);
    return m;
}

}  // namespace

TEST(Wasserstein1, EqualSizesSortedMatching) {
    EXPECT_DOUBLE_EQ(wasserstein1({0.0}, {1.0}), 1.0);
    EXPECT_DOUBLE_EQ(wasserstein1({3.0, 1.0, 2.0}, {1.0, 2.0, 3.0}), 0.0);
    EXPECT_DOUBLE_EQ(wasserstein1({0.0, 0.0}, {1.0, 3.0}), 2.0);
}

TEST(Wasserstein1, UnequalSizesInterpolate) {
    // {0,1} vs {0.5}: quantiles of the singleton are constant 0.5
    EXPECT_DOUBLE_EQ(wasserstein1({0.0, 1.0}, {0.5}), 0.5);
    // translation-equivariance on unequal supports
    const double base = wasserstein1({0.0, 0.4, 1.1}, {0.2, 0.9});
    const double shifted = wasserstein1({10.0, 10.4, 11.1}, {10.2, 10.9});
    EXPECT_NEAR(base, shifted, 1e-12);
}

TEST(EvaluateSwd, ZeroOnIdenticalSets) {
    const MatRM x = gaussian_cloud(500, 2, 0.0, 1);
    EXPECT_DOUBLE_EQ(evaluate_swd(x, x, 32, 7), 0.0);
}

TEST(EvaluateSwd, PointMassesOneApart) {
    MatRM a(1, 1), b(1, 1);
    a << 0.0;
    b << 1.0;
    // in one dimension every unit direction is +-1
    EXPECT_DOUBLE_EQ(evaluate_swd(a, b, 16, 3), 1.0);
}

TEST(EvaluateSwd, SymmetricAndPermutationInvariant) {
    const MatRM x = gaussian_cloud(200, 2, 0.0, 2);
    const MatRM y = gaussian_cloud(300, 2, 1.0, 3);
    EXPECT_NEAR(evaluate_swd(x, y, 64, 5), evaluate_swd(y, x, 64, 5), 1e-12);

    MatRM xp = x;
    for (Eigen::Index i = 0; i < x.rows(); ++i) xp.row(i) = x.row(x.rows() - 1 - i);
    EXPECT_DOUBLE_EQ(evaluate_swd(x, y, 64, 5), evaluate_swd(xp, y, 64, 5));
}

TEST(EvaluateSwd, NonNegative) {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        const MatRM x = gaussian_cloud(100, 3, 0.0, 10 + seed);
        const MatRM y = gaussian_cloud(120, 3, 0.3, 20 + seed);
        EXPECT_GE(evaluate_swd(x, y, 16, seed), 0.0);
    }
}

// Two unit Gaussians 2 apart along x: for each direction u the 1-D distance
// is |<mu, u>| exactly (equal variances), so the sliced value must match the
// per-direction oracle averaged over the same seeded directions. Checked
// against a Monte-Carlo direction average rather than the closed form so the
// direction-sampling noise cancels.
TEST(EvaluateSwd, ShiftedGaussianMatchesPerDirectionOracle) {
    const int n = 100000;
    const MatRM x = gaussian_cloud(n, 2, 0.0, 31);
    const MatRM y = gaussian_cloud(n, 2, 2.0, 32);
    const int n_proj = 128;
    const uint64_t seed = 77;
    const double measured = evaluate_swd(x, y, n_proj, seed);

    // replicate the projection stream and average the analytic 1-D values
    auto eng = rng::make_engine(seed, "swd-projections");
    double oracle = 0.0;
    for (int p = 0; p < n_proj; ++p) {
        double dx, dy, norm;
        do {
            dx = rng::normal(eng);
            dy = rng::normal(eng);
            norm = std::sqrt(dx * dx + dy * dy);
        } while (norm == 0.0);
        oracle += std::abs(2.0 * dx / norm);
    }
    oracle /= n_proj;

    EXPECT_NEAR(measured, oracle, 0.02 * oracle);
    // sanity: the direction-averaged value sits near 2 * E|cos| = 4/pi
    EXPECT_NEAR(measured, 4.0 / std::numbers::pi, 0.10 * 4.0 / std::numbers::pi);
}

TEST(EvaluateSwd, Validation) {
    const MatRM x = gaussian_cloud(10, 2, 0.0, 1);
    const MatRM y = gaussian_cloud(10, 3, 0.0, 2);
    EXPECT_THROW(evaluate_swd(x, y, 8, 0), std::invalid_argument);
    EXPECT_THROW(evaluate_swd(x, x, 0, 0), std::invalid_argument);
}

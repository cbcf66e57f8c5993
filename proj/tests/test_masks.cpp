#include "dtr/masks.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "dtr/rng.hpp"
#include "test_util.hpp"

using namespace dtr;

namespace {

MaskSpec dtr_spec(int T, int C, double beta, double alpha) {
    MaskSpec s;
    s.strategy = MaskStrategy::dtr;
    s.T = T;
    s.C = C;
    s.beta = beta;
    s.alpha = alpha;
    return s;
}

std::set<int> active_set(const MaskBank& bank, int i) {
    std::set<int> out;
    for (int c = 0; c < bank.spec.C; ++c)
        if (bank.at(i, c)) out.insert(c + 1);  // 1-indexed channels
    return out;
}

bool row_is_contiguous(const MaskBank& bank, int i) {
    int first = -1, last = -1, count = 0;
    for (int c = 0; c < bank.spec.C; ++c) {
        if (bank.at(i, c)) {
            if (first < 0) first = c;
            last = c;
            ++count;
        }
    }
    return count > 0 && last - first + 1 == count;
}

// Independent route to the hypergeometric mean: pmf terms built from long
// double factorial ratios, summed directly.
long double hypergeom_mean_oracle(int c, int c_beta) {
    auto ld_choose = [](int n, int k) -> long double {
        if (k < 0 || k > n) return 0.0L;
        long double r = 1.0L;
        for (int i = 1; i <= k; ++i) r = r * (long double)(n - k + i) / (long double)i;
        return r;
    };
    long double total = 0.0L;
    const long double denom = ld_choose(c, c_beta);
    for (int k = 0; k <= c_beta; ++k)
        total += (long double)k * ld_choose(c_beta, k) * ld_choose(c - c_beta, c_beta - k) / denom;
    return total;
}

}  // namespace

TEST(DtrMask, HandDerivedAlpha1) {
    auto bank = make_dtr_mask(dtr_spec(4, 5, 0.6, 1.0));
    ASSERT_EQ(bank.spec.active_channels(), 3);
    EXPECT_EQ(dtr_offset(bank.spec, 0), 0);
    EXPECT_EQ(dtr_offset(bank.spec, 1), 1);
    EXPECT_EQ(dtr_offset(bank.spec, 2), 1);
    EXPECT_EQ(dtr_offset(bank.spec, 3), 2);
    EXPECT_EQ(active_set(bank, 0), (std::set<int>{1, 2, 3}));
    EXPECT_EQ(active_set(bank, 1), (std::set<int>{2, 3, 4}));
    EXPECT_EQ(active_set(bank, 2), (std::set<int>{2, 3, 4}));
    EXPECT_EQ(active_set(bank, 3), (std::set<int>{3, 4, 5}));
}

TEST(DtrMask, HandDerivedAlpha4) {
    auto bank = make_dtr_mask(dtr_spec(4, 5, 0.6, 4.0));
    EXPECT_EQ(dtr_offset(bank.spec, 0), 0);
    EXPECT_EQ(dtr_offset(bank.spec, 1), 0);
    EXPECT_EQ(dtr_offset(bank.spec, 2), 0);
    EXPECT_EQ(dtr_offset(bank.spec, 3), 2);
    EXPECT_EQ(active_set(bank, 0), (std::set<int>{1, 2, 3}));
    EXPECT_EQ(active_set(bank, 1), (std::set<int>{1, 2, 3}));
    EXPECT_EQ(active_set(bank, 2), (std::set<int>{1, 2, 3}));
    EXPECT_EQ(active_set(bank, 3), (std::set<int>{3, 4, 5}));
}

TEST(DtrMask, BetaOneIsAllOnes) {
    for (double alpha : {0.5, 1.0, 4.0}) {
        auto bank = make_dtr_mask(dtr_spec(7, 6, 1.0, alpha));
        for (uint8_t v : bank.rows) EXPECT_EQ(v, 1);
        auto full = make_full_mask(7, 6);
        EXPECT_EQ(bank.rows, full.rows);
    }
}

TEST(DtrMask, SingleTimestep) {
    auto bank = make_dtr_mask(dtr_spec(1, 5, 0.6, 2.0));
    EXPECT_EQ(active_set(bank, 0), (std::set<int>{1, 2, 3}));
}

TEST(DtrMask, ContiguityAndMonotoneOffsets) {
    for (double alpha : {0.5, 1.0, 2.0, 4.0}) {
        for (double beta : {0.5, 0.8}) {
            for (int T : {1, 2, 5, 17, 64}) {
                auto bank = make_dtr_mask(dtr_spec(T, 32, beta, alpha));
                int prev = 0;
                for (int i = 0; i < T; ++i) {
                    EXPECT_TRUE(row_is_contiguous(bank, i));
                    const int off = dtr_offset(bank.spec, i);
                    EXPECT_GE(off, prev);
                    prev = off;
                }
                EXPECT_EQ(dtr_offset(bank.spec, 0), 0);
                if (T > 1)
                    EXPECT_EQ(dtr_offset(bank.spec, T - 1), 32 - bank.spec.active_channels());
            }
        }
    }
}

// Larger alpha keeps the window at offset 0 for at least as many rows,
// dedicating the trailing channels to high timesteps.
TEST(DtrMask, LargerAlphaKeepsMoreRowsAtOffsetZero) {
    for (double alpha : {2.0, 4.0, 8.0}) {
        auto base = dtr_spec(100, 32, 0.8, 1.0);
        auto steep = dtr_spec(100, 32, 0.8, alpha);
        int zeros_base = 0, zeros_steep = 0;
        for (int i = 0; i < 100; ++i) {
            zeros_base += dtr_offset(base, i) == 0;
            zeros_steep += dtr_offset(steep, i) == 0;
        }
        EXPECT_GE(zeros_steep, zeros_base);
    }
}

TEST(RandomMask, RowSumsForced) {
    MaskSpec s;
    s.strategy = MaskStrategy::random;
    s.T = 3;
    s.C = 4;
    s.beta = 0.5;
    s.seed = 123;
    auto bank = make_random_mask(s);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(bank.row_sum(i), 2);
}

TEST(RandomMask, SameSeedSameBank) {
    MaskSpec s;
    s.strategy = MaskStrategy::random;
    s.T = 50;
    s.C = 16;
    s.beta = 0.7;
    s.seed = 99;
    EXPECT_EQ(make_random_mask(s).rows, make_random_mask(s).rows);
    MaskSpec other = s;
    other.seed = 100;
    EXPECT_NE(make_random_mask(other).rows, make_random_mask(s).rows);
}

TEST(RandomMask, SharedChannelMeanMatchesHypergeometricMean) {
    MaskSpec s;
    s.strategy = MaskStrategy::random;
    s.T = 2000;
    s.C = 8;
    s.beta = 0.5;
    s.seed = 7;
    auto bank = make_random_mask(s);
    const double expected = expected_shared_channels(8, 4);
    EXPECT_NEAR(expected, 2.0, 1e-12);

    auto eng = rng::make_engine(31337, "pairs");
    const int n_pairs = 100000;
    double sum = 0, sumsq = 0;
    for (int k = 0; k < n_pairs; ++k) {
        int i = int(rng::uniform_below(eng, 2000));
        int j;
        do {
            j = int(rng::uniform_below(eng, 2000));
        } while (j == i);
        const double v = shared_channels(bank, i, j);
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / n_pairs;
    const double var = sumsq / n_pairs - mean * mean;
    const double se = std::sqrt(var / n_pairs);
    EXPECT_NEAR(mean, expected, 3 * se);
}

TEST(FullMask, Examples) {
    auto one = make_full_mask(1, 1);
    EXPECT_EQ(one.rows, std::vector<uint8_t>{1});
    auto bank = make_full_mask(3, 2);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(bank.at(i, 0), 1);
        EXPECT_EQ(bank.at(i, 1), 1);
    }
}

TEST(SharedChannels, DiagonalIsActiveCount) {
    auto bank = make_dtr_mask(dtr_spec(9, 12, 0.5, 2.0));
    for (int i = 0; i < 9; ++i)
        EXPECT_EQ(shared_channels(bank, i, i), bank.spec.active_channels());
}

TEST(SharedChannels, DtrClosedFormFromOffsets) {
    for (double alpha : {1.0, 4.0}) {
        auto bank = make_dtr_mask(dtr_spec(16, 10, 0.6, alpha));
        const int cb = bank.spec.active_channels();
        for (int i = 0; i < 16; ++i) {
            for (int j = 0; j < 16; ++j) {
                const int gap = std::abs(dtr_offset(bank.spec, i) - dtr_offset(bank.spec, j));
                EXPECT_EQ(shared_channels(bank, i, j), std::max(0, cb - gap));
            }
        }
    }
}

TEST(SharedChannels, FullBankAlwaysC) {
    auto bank = make_full_mask(5, 7);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) EXPECT_EQ(shared_channels(bank, i, j), 7);
}

TEST(SharedChannels, IndexOutOfRange) {
    auto bank = make_full_mask(3, 3);
    EXPECT_THROW(shared_channels(bank, 0, 3), std::out_of_range);
    EXPECT_THROW(shared_channels(bank, -1, 0), std::out_of_range);
}

TEST(ExpectedShared, HandValues) {
    EXPECT_NEAR(expected_shared_channels(10, 5), 2.5, 1e-12);
    EXPECT_NEAR(expected_shared_channels(4, 1), 0.25, 1e-12);
    EXPECT_DOUBLE_EQ(expected_shared_channels(6, 6), 6.0);
}

TEST(ExpectedShared, MatchesClosedFormUpTo64) {
    for (int c = 1; c <= 64; ++c) {
        for (int cb = 1; cb <= c; ++cb) {
            const double closed = double(cb) * double(cb) / double(c);
            EXPECT_NEAR(expected_shared_channels(c, cb), closed, 1e-12)
                << "c=" << c << " cb=" << cb;
        }
    }
}

TEST(ExpectedShared, MatchesBruteForcePmfSum) {
    for (int c : {3, 8, 17, 33, 64}) {
        for (int cb = 1; cb <= c; cb += 3) {
            const long double oracle = hypergeom_mean_oracle(c, cb);
            EXPECT_NEAR(expected_shared_channels(c, cb), double(oracle), 1e-10);
        }
    }
}

TEST(ExpectedShared, RejectsBadArguments) {
    EXPECT_THROW(expected_shared_channels(4, 5), std::invalid_argument);
    EXPECT_THROW(expected_shared_channels(4, 0), std::invalid_argument);
}

TEST(OverlapMatrix, HandDerivedRow) {
    auto bank = make_dtr_mask(dtr_spec(4, 5, 0.6, 1.0));
    auto m = overlap_matrix(bank);
    EXPECT_EQ(m[0], 3);
    EXPECT_EQ(m[1], 2);
    EXPECT_EQ(m[2], 2);
    EXPECT_EQ(m[3], 1);
}

TEST(OverlapMatrix, SymmetricWithDiagonal) {
    MaskSpec s;
    s.strategy = MaskStrategy::random;
    s.T = 12;
    s.C = 9;
    s.beta = 0.44;
    s.seed = 5;
    for (const auto& bank : {make_random_mask(s), make_dtr_mask(dtr_spec(12, 9, 0.44, 3.0)),
                             make_full_mask(12, 9)}) {
        auto m = overlap_matrix(bank);
        const int T = bank.spec.T;
        for (int i = 0; i < T; ++i) {
            EXPECT_EQ(m[size_t(i) * T + i], bank.spec.active_channels());
            for (int j = 0; j < T; ++j) EXPECT_EQ(m[size_t(i) * T + j], m[size_t(j) * T + i]);
        }
    }
}

TEST(OverlapMatrix, FullBankConstant) {
    auto m = overlap_matrix(make_full_mask(4, 6));
    for (int v : m) EXPECT_EQ(v, 6);
}

// For a fixed row, shared channels never increase as the partner moves away.
TEST(DtrMask, AffinityMonotoneInTimestepDistance) {
    for (double alpha : {0.5, 1.0, 2.0, 4.0}) {
        for (double beta : {0.5, 0.8}) {
            for (int T : {2, 16, 64}) {
                auto bank = make_dtr_mask(dtr_spec(T, 24, beta, alpha));
                for (int i = 0; i < T; ++i) {
                    for (int d = 1; d < T; ++d) {
                        for (int dir : {-1, 1}) {
                            const int j_near = i + dir * (d - 1);
                            const int j_far = i + dir * d;
                            if (j_far < 0 || j_far >= T || j_near < 0 || j_near >= T) continue;
                            EXPECT_GE(shared_channels(bank, i, j_near), shared_channels(bank, i, j_far));
                        }
                    }
                }
            }
        }
    }
}

TEST(MaskSpecValidation, NamesViolatedBound) {
    MaskSpec s = dtr_spec(4, 5, 0.0, 1.0);
    EXPECT_THROW(make_dtr_mask(s), std::invalid_argument);
    s = dtr_spec(4, 5, 1.5, 1.0);
    EXPECT_THROW(make_dtr_mask(s), std::invalid_argument);
    s = dtr_spec(4, 5, 0.6, -1.0);
    EXPECT_THROW(make_dtr_mask(s), std::invalid_argument);
    s = dtr_spec(0, 5, 0.6, 1.0);
    EXPECT_THROW(make_dtr_mask(s), std::invalid_argument);
    s = dtr_spec(4, 0, 0.6, 1.0);
    EXPECT_THROW(make_dtr_mask(s), std::invalid_argument);
    // floor(beta*C) = 0
    s = dtr_spec(4, 5, 0.1, 1.0);
    EXPECT_THROW(make_dtr_mask(s), std::invalid_argument);
}

TEST(MaskCsv, RoundTripExactly) {
    testutil::TempDir dir;
    MaskSpec s;
    s.strategy = MaskStrategy::random;
    s.T = 11;
    s.C = 7;
    s.beta = 0.59;
    s.alpha = 2.5;
    s.seed = 0xDEADBEEFCAFEULL;
    auto bank = make_random_mask(s);
    const auto path = dir.file("bank.csv");
    write_mask_csv(bank, path);
    auto back = read_mask_csv(path);
    EXPECT_TRUE(back.spec == bank.spec);
    EXPECT_EQ(back.rows, bank.rows);
}

TEST(MaskCsv, HandDerivedFileContent) {
    testutil::TempDir dir;
    auto bank = make_dtr_mask(dtr_spec(4, 5, 0.6, 1.0));
    const auto path = dir.file("bank.csv");
    write_mask_csv(bank, path);
    EXPECT_EQ(testutil::read_file(path),
              "4,5,dtr,1,0.6,0\n"
              "1,1,1,0,0\n"
              "0,1,1,1,0\n"
              "0,1,1,1,0\n"
              "0,0,1,1,1\n");
}

TEST(MaskCsv, RejectsCorruptRows) {
    testutil::TempDir dir;
    const auto path = dir.file("bad.csv");
    testutil::write_file(path, "2,3,dtr,1,0.67,0\n1,1,0\n1,1,1\n");  // row 1 sums to 3, C_beta = 2
    EXPECT_THROW(read_mask_csv(path), std::invalid_argument);
}

TEST(MaskPgm, HandDerivedFileContent) {
    testutil::TempDir dir;
    auto bank = make_dtr_mask(dtr_spec(4, 5, 0.6, 1.0));
    const auto path = dir.file("bank.pgm");
    write_mask_pgm(bank, path);
    EXPECT_EQ(testutil::read_file(path),
              "P2\n5 4\n1\n"
              "1 1 1 0 0\n"
              "0 1 1 1 0\n"
              "0 1 1 1 0\n"
              "0 0 1 1 1\n");
}

TEST(MaskBankForWidth, SharesEverythingButWidth) {
    auto spec = dtr_spec(10, 64, 0.8, 4.0);
    auto narrow = make_bank_for_width(spec, 16);
    EXPECT_EQ(narrow.spec.C, 16);
    EXPECT_EQ(narrow.spec.T, 10);
    EXPECT_EQ(narrow.spec.alpha, 4.0);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(narrow.row_sum(i), int(std::floor(0.8 * 16)));
}

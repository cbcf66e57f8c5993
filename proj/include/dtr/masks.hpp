#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dtr {

// How the per-timestep routing masks are instantiated.
//   full   - every channel active for every task (routing is a no-op)
//   random - each task activates an independent uniform random channel subset
//   dtr    - sliding contiguous window whose offset grows like (t/T)^alpha
enum class MaskStrategy { full, random, dtr };

const char* to_string(MaskStrategy s);
MaskStrategy mask_strategy_from_string(const std::string& s);

struct MaskSpec {
    MaskStrategy strategy = MaskStrategy::dtr;
    int T = 1000;          // number of denoising tasks (timesteps)
    int C = 64;            // channel count
    double alpha = 4.0;    // window-shift exponent; >1 dedicates more channels to high timesteps
    double beta = 0.8;     // activation ratio in (0, 1]
    uint64_t seed = 0;     // PRNG seed, random strategy only

    // C_beta = floor(beta * C), the number of active channels per task.
    int active_channels() const;
    void validate() const;  // throws std::invalid_argument naming the violated bound
};

bool operator==(const MaskSpec& a, const MaskSpec& b);

// T x C binary bank; row i corresponds to timestep t = i + 1.
// Immutable after construction and safe to share across concurrent readers.
struct MaskBank {
    MaskSpec spec;
    std::vector<uint8_t> rows;  // row-major T*C, entries in {0,1}

    uint8_t at(int i, int c) const { return rows[size_t(i) * spec.C + c]; }
    const uint8_t* row(int i) const { return rows.data() + size_t(i) * spec.C; }
    int row_sum(int i) const;
};

// Window start for row i of a dtr bank:
//   offset(i) = round((C - C_beta) * x_i^alpha),  x_i = i / (T - 1)  (x_0 = 0 for T = 1)
// round is half-away-from-zero; integral alpha is evaluated by repeated
// squaring so the result does not depend on the platform's pow().
int dtr_offset(const MaskSpec& spec, int i);

MaskBank make_dtr_mask(const MaskSpec& spec);
MaskBank make_random_mask(const MaskSpec& spec);
MaskBank make_full_mask(int T, int C);
MaskBank make_bank(const MaskSpec& spec);  // dispatch on spec.strategy

// Same strategy/T/alpha/beta/seed applied at a different channel width, for
// networks whose blocks disagree on width.
MaskBank make_bank_for_width(const MaskSpec& spec, int width);

// |{c : rows[i][c] = 1 and rows[j][c] = 1}|
int shared_channels(const MaskBank& bank, int i, int j);

// Expected number of shared channels between two *distinct* tasks when each
// activates an independent uniform random subset of c_beta out of c channels:
//   sum_k k * P(k),  P(k) = binom(c_beta, k) binom(c - c_beta, c_beta - k) / binom(c, c_beta)
// Evaluated in exact integer arithmetic for c <= 64 (analytically c_beta^2 / c).
double expected_shared_channels(int c, int c_beta);

// T x T row-major matrix of pairwise shared-channel counts.
std::vector<int> overlap_matrix(const MaskBank& bank);

// CSV layout: one header line "T,C,strategy,alpha,beta,seed" holding the
// values in that order, then T lines of C comma-separated {0,1} digits.
void write_mask_csv(const MaskBank& bank, const std::string& path);
MaskBank read_mask_csv(const std::string& path);

// PGM (P2, maxval 1), one pixel per entry, rows = timesteps top to bottom.
void write_mask_pgm(const MaskBank& bank, const std::string& path);

}  // namespace dtr

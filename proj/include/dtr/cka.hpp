#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dtr/denoiser.hpp"
#include "dtr/linalg.hpp"
#include "dtr/masks.hpp"
#include "dtr/schedule.hpp"

namespace dtr {

// Linear centered-kernel-alignment similarity of two feature matrices with a
// shared row (sample) axis:
//   |Yc^T Xc|_F^2 / (|Xc^T Xc|_F * |Yc^T Yc|_F)
// where c denotes column-mean centering. Returns 0 when either centered
// matrix is identically zero.
double linear_cka(const MatRM& x, const MatRM& y);

// Per-block timestep-by-timestep similarity matrix.
struct CKAMatrix {
    int block = 0;
    std::vector<int> timesteps;
    MatRM values;  // K x K, symmetric, unit diagonal
};

// Runs the model on the same diffused batch for each probed timestep (one x0
// batch, one shared noise draw from the seed) recording the given block's
// post-block activations; entry (a, b) compares the traces of probes a and b.
CKAMatrix cka_timestep_matrix(const Denoiser& model, const MaskBank* bank,
                              const NoiseSchedule& sched, const MatRM& x0,
                              const std::vector<int>& timesteps, int block, uint64_t seed);

// K evenly spaced probe timesteps in {1..T}.
std::vector<int> default_probe_timesteps(int T, int k);

// CSV: header "block,timesteps...", then K rows of K values at 10
// significant digits, clamped to [0, 1].
void write_cka_csv(const CKAMatrix& m, const std::string& path);

void mask_heatmap_export(const MaskBank& bank, const std::string& path);

// PGM of the pairwise shared-channel matrix, maxval = C_beta.
void overlap_heatmap_export(const MaskBank& bank, const std::string& path);

}  // namespace dtr

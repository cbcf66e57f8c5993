#pragma once

#include <cstdint>

#include "dtr/linalg.hpp"

namespace dtr {

// Sliced 1-Wasserstein distance between two point sets of equal dimension:
// the average over n_proj seeded random unit directions of the 1-D W1
// distance between the projections, computed by sorted-quantile matching
// with linear interpolation onto max(n, m) common quantile points.
double evaluate_swd(const MatRM& samples, const MatRM& reference, int n_proj, uint64_t seed);

// 1-D W1 between two unsorted sample sets (the per-direction kernel).
double wasserstein1(std::vector<double> a, std::vector<double> b);

}  // namespace dtr

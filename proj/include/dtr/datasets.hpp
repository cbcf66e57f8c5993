#pragma once

#include <cstdint>
#include <string>

#include "dtr/linalg.hpp"

namespace dtr {

// Built-in 2-D toy datasets:
//   gauss8       - equal-weight mixture of 8 sigma=0.1 Gaussians on a
//                  radius-2 circle
//   swissroll    - spiral with small isotropic noise
//   checkerboard - alternating unit cells on [-2, 2) x [-2, 2)
// gen_dataset standardizes the draw to zero mean and unit per-dimension
// variance; gen_dataset_raw returns the untouched construction.
MatRM gen_dataset(const std::string& name, int n, uint64_t seed);
MatRM gen_dataset_raw(const std::string& name, int n, uint64_t seed);

bool is_dataset_name(const std::string& name);

}  // namespace dtr

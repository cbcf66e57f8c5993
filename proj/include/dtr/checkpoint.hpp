#pragma once

#include <cstdint>
#include <string>

#include "dtr/denoiser.hpp"
#include "dtr/masks.hpp"
#include "dtr/params.hpp"

namespace dtr {

// Binary checkpoint: magic "DTRCKPT1", then a 32-bit little-endian tensor
// count, then per tensor: 16-bit name length, UTF-8 name, 8-bit rank, 32-bit
// dims, raw 64-bit little-endian floats in row-major order. Parameters are
// stored under "param/", the EMA shadow under "ema/", and the step count,
// model config, and mask spec as reserved "__meta__/" tensors.
struct Checkpoint {
    DenoiserConfig model_cfg;
    MaskSpec mask_spec;
    uint64_t step = 0;
    ParamSet params;
    ParamSet ema;
};

void write_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace dtr

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dtr::rng {

uint64_t splitmix64(uint64_t x);
uint64_t fnv1a64(std::string_view s);

// Stream seed = splitmix64(master ^ fnv1a64(name)). Every consumer of
// randomness owns a named stream, so changing how one stream is used never
// perturbs the draws of another.
uint64_t derive_seed(uint64_t master, std::string_view stream);
std::mt19937_64 make_engine(uint64_t master, std::string_view stream);

// Unbiased integer in [0, n) by rejection sampling.
uint64_t uniform_below(std::mt19937_64& eng, uint64_t n);

// Uniform in [0, 1) with 53 random bits.
double uniform01(std::mt19937_64& eng);

// Standard normal via Box-Muller; consumes exactly two engine draws per
// call, so the draw sequence is pinned by this code rather than by the
// standard library's distribution internals.
double normal(std::mt19937_64& eng);

}  // namespace dtr::rng

#include "dtr/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dtr::rng {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

uint64_t derive_seed(uint64_t master, std::string_view stream) {
    return splitmix64(master ^ fnv1a64(stream));
}

std::mt19937_64 make_engine(uint64_t master, std::string_view stream) {
    return std::mt19937_64(derive_seed(master, stream));
}

uint64_t uniform_below(std::mt19937_64& eng, uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
        v = eng();
    } while (v >= limit);
    return v % n;
}

double uniform01(std::mt19937_64& eng) {
    return double(eng() >> 11) * 0x1.0p-53;
}

double normal(std::mt19937_64& eng) {
    // u1 in (0, 1] so the log is finite.
    const double u1 = double((eng() >> 11) + 1) * 0x1.0p-53;
    const double u2 = double(eng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace dtr::rng

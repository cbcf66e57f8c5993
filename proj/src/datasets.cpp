#include "dtr/datasets.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dtr/rng.hpp"

namespace dtr {

namespace {

constexpr double kPi = std::numbers::pi;

MatRM gen_gauss8(int n, std::mt19937_64& eng) {
    MatRM out(n, 2);
    for (int i = 0; i < n; ++i) {
        const auto k = rng::uniform_below(eng, 8);
        const double angle = 2.0 * kPi * double(k) / 8.0;
        out(i, 0) = 2.0 * std::cos(angle) + 0.1 * rng::normal(eng);
        out(i, 1) = 2.0 * std::sin(angle) + 0.1 * rng::normal(eng);
    }
    return out;
}

MatRM gen_swissroll(int n, std::mt19937_64& eng) {
    MatRM out(n, 2);
    for (int i = 0; i < n; ++i) {
        const double theta = 1.5 * kPi * (1.0 + 2.0 * rng::uniform01(eng));
        out(i, 0) = theta * std::cos(theta) / kPi + 0.1 * rng::normal(eng);
        out(i, 1) = theta * std::sin(theta) / kPi + 0.1 * rng::normal(eng);
    }
    return out;
}

MatRM gen_checkerboard(int n, std::mt19937_64& eng) {
    MatRM out(n, 2);
    for (int i = 0; i < n; ++i) {
        const double x1 = 4.0 * rng::uniform01(eng) - 2.0;
        const double u = rng::uniform01(eng) - double(rng::uniform_below(eng, 2)) * 2.0;
        const int cell = int(std::floor(x1));
        const double parity = double(((cell % 2) + 2) % 2);
        out(i, 0) = x1;
        out(i, 1) = u + parity;
    }
    return out;
}

}  // namespace

bool is_dataset_name(const std::string& name) {
    return name == "gauss8" || name == "swissroll" || name == "checkerboard";
}

MatRM gen_dataset_raw(const std::string& name, int n, uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_dataset: n must be >= 1");
    auto eng = rng::make_engine(seed, "dataset:" + name);
    if (name == "gauss8") return gen_gauss8(n, eng);
    if (name == "swissroll") return gen_swissroll(n, eng);
    if (name == "checkerboard") return gen_checkerboard(n, eng);
    throw std::invalid_argument("unknown dataset '" + name +
                                "' (expected gauss8|swissroll|checkerboard)");
}

MatRM gen_dataset(const std::string& name, int n, uint64_t seed) {
    MatRM data = gen_dataset_raw(name, n, seed);
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        const double mean = data.col(j).mean();
        data.col(j).array() -= mean;
        const double var = data.col(j).squaredNorm() / double(data.rows());
        if (var > 0.0) data.col(j) /= std::sqrt(var);
    }
    return data;
}

}  // namespace dtr

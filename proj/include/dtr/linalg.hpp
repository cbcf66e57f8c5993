#pragma once

#include <Eigen/Dense>

namespace dtr {

// Row-major throughout: batches are (rows = samples, cols = channels) and
// weights are (rows = outputs, cols = inputs), matching the serialized layout.
using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VecX = Eigen::VectorXd;

}  // namespace dtr

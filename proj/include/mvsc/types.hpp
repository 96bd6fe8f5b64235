#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace mvsc {

// Dense matrices are sample-major: row i = sample i.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

using IndexMatrix = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>;

}  // namespace mvsc

#pragma once

#include <Eigen/Dense>

namespace ellq {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

}  // namespace ellq

#pragma once

#include <Eigen/Dense>

namespace gsc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace gsc

#pragma once

#include <Eigen/Dense>

namespace imlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Largest singular value. Uses the Gram matrix on the smaller side.
double op_norm(const Mat& a);

}  // namespace imlab

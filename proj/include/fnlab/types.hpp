#pragma once

#include <Eigen/Dense>

namespace fnlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace fnlab

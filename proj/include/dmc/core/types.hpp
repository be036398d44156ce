#pragma once

#include <Eigen/Dense>
#include <vector>

namespace dmc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Node-sampled signal: column k holds the value at grid node k.
using NodeSignal = Eigen::MatrixXd;

}  // namespace dmc

#pragma once

#include <Eigen/Dense>

namespace delayosc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

using Index = Eigen::Index;

}  // namespace delayosc

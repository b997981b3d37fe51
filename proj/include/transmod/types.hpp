#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace transmod {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;
using IntVector = Eigen::VectorXi;
using Index = Eigen::Index;

}  // namespace transmod

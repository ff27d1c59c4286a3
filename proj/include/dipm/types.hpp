#ifndef DIPM_TYPES_HPP_
#define DIPM_TYPES_HPP_

#include <Eigen/Dense>

#include <vector>

namespace dipm {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// One vector per agent, each living on that agent's index set.
using Slices = std::vector<Vector>;

}  // namespace dipm

#endif  // DIPM_TYPES_HPP_

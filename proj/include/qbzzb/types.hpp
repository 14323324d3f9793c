#pragma once

#include <Eigen/Dense>

namespace qbzzb {

using Index = Eigen::Index;

template <typename Scalar = double>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar = double>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

}  // namespace qbzzb

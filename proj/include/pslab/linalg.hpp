#pragma once

#include <Eigen/Dense>
#include <complex>

namespace pslab {

using cplx = std::complex<double>;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

}  // namespace pslab

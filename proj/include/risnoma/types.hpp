#pragma once

#include <complex>

#include <Eigen/Dense>

namespace risnoma {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

}  // namespace risnoma

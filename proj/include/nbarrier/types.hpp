#pragma once

#include <Eigen/Core>

namespace nbarrier {

// Species-space point for n = 2 or 3; dynamic size with stack storage.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline Point make_point(double u, double v) {
  Point p(2);
  p << u, v;
  return p;
}

inline Point make_point(double u, double v, double w) {
  Point p(3);
  p << u, v, w;
  return p;
}

}  // namespace nbarrier

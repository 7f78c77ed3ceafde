#pragma once

#include <Eigen/Dense>

#include "upm/matrix.hpp"

namespace upm::detail {

using ERow = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::Map<const ERow> emap(const Matrix& m) {
  return {m.data().data(), m.rows(), m.cols()};
}

inline Eigen::Map<ERow> emap_mut(Matrix& m) {
  return {mutable_data(m).data(), m.rows(), m.cols()};
}

inline Matrix from_eigen(const ERow& e) {
  Matrix out(static_cast<int>(e.rows()), static_cast<int>(e.cols()));
  emap_mut(out) = e;
  return out;
}

}  // namespace upm::detail

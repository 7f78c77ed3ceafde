#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "upm/precision.hpp"
#include "upm/rng.hpp"

namespace upm {

// Dense row-major real matrix. Values are stored as F64 but constrained to
// the grid of `precision()`; construction and every producing operation
// re-round, so the constraint is an invariant. Treat instances as immutable
// values: operations are pure functions returning new matrices.
class Matrix {
 public:
  Matrix() = default;  // empty placeholder; real matrices have rows,cols >= 1
  Matrix(int rows, int cols, PrecisionMode p = PrecisionMode::F64);

  static Matrix identity(int n, PrecisionMode p = PrecisionMode::F64);
  static Matrix constant(int rows, int cols, double value,
                         PrecisionMode p = PrecisionMode::F64);
  // Entries drawn i.i.d. N(0, stddev^2), stored at F64.
  static Matrix gaussian(int rows, int cols, Rng& rng, double stddev = 1.0);
  static Matrix from_fn(int rows, int cols, const std::function<double(int, int)>& fn,
                        PrecisionMode p = PrecisionMode::F64);
  // Takes ownership of row-major data; rounds onto the grid of p.
  static Matrix from_raw(int rows, int cols, std::vector<double> data,
                         PrecisionMode p = PrecisionMode::F64);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  PrecisionMode precision() const { return precision_; }
  bool empty() const { return data_.empty(); }

  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool bitwise_equal(const Matrix& other) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  PrecisionMode precision_ = PrecisionMode::F64;
  std::vector<double> data_;

  friend std::vector<double>& mutable_data(Matrix& m);
};

// Internal accessor for kernels in this library; callers must re-establish
// the grid invariant before handing the matrix out.
std::vector<double>& mutable_data(Matrix& m);

// Product accumulated at F64, each output entry then rounded onto
// out_precision's grid. Throws ContractViolation on an inner-dim mismatch.
Matrix matmul(const Matrix& a, const Matrix& b,
              PrecisionMode out_precision = PrecisionMode::F64,
              RoundStats* stats = nullptr);

// Entry-wise round-to-nearest-even onto p's grid; idempotent. Overflow
// clamps to the largest finite grid value and is counted in stats (or
// propagates to infinity when propagate_inf is set).
Matrix round_to(const Matrix& m, PrecisionMode p, RoundStats* stats = nullptr,
                bool propagate_inf = false);

Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b, PrecisionMode out_p = PrecisionMode::F64);
Matrix sub(const Matrix& a, const Matrix& b, PrecisionMode out_p = PrecisionMode::F64);
Matrix scale(const Matrix& m, double s, PrecisionMode out_p = PrecisionMode::F64);
Matrix hadamard(const Matrix& a, const Matrix& b, PrecisionMode out_p = PrecisionMode::F64);

double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);
// ||a - ref||_F / ||ref||_F
double rel_fro_error(const Matrix& a, const Matrix& ref);
// max_ij |a_ij - ref_ij| / max_ij |ref_ij|
double rel_max_deviation(const Matrix& a, const Matrix& ref);
double dot_flat(const Matrix& a, const Matrix& b);

}  // namespace upm

#include "upm/matrix.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "upm/error.hpp"

namespace upm {
namespace {

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const EigenRowMajor>;
using Map = Eigen::Map<EigenRowMajor>;

void check_dims(int rows, int cols) {
  if (rows < 1 || cols < 1)
    throw ContractViolation("matrix dimensions must be at least 1x1");
}

void round_in_place(std::vector<double>& v, PrecisionMode p, RoundStats* stats,
                    bool propagate_inf = false) {
  if (p == PrecisionMode::F64) return;
  for (double& x : v) x = round_scalar(x, p, stats, propagate_inf);
}

}  // namespace

Matrix::Matrix(int rows, int cols, PrecisionMode p)
    : rows_(rows), cols_(cols), precision_(p) {
  check_dims(rows, cols);
  data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

Matrix Matrix::identity(int n, PrecisionMode p) {
  Matrix m(n, n, p);
  for (int i = 0; i < n; ++i) m.data_[static_cast<std::size_t>(i) * n + i] = 1.0;
  return m;
}

Matrix Matrix::constant(int rows, int cols, double value, PrecisionMode p) {
  Matrix m(rows, cols, p);
  const double v = round_scalar(value, p);
  for (double& x : m.data_) x = v;
  return m;
}

Matrix Matrix::gaussian(int rows, int cols, Rng& rng, double stddev) {
  Matrix m(rows, cols, PrecisionMode::F64);
  for (double& x : m.data_) x = stddev * rng.gaussian();
  return m;
}

Matrix Matrix::from_fn(int rows, int cols, const std::function<double(int, int)>& fn,
                       PrecisionMode p) {
  Matrix m(rows, cols, p);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      m.data_[static_cast<std::size_t>(r) * cols + c] = round_scalar(fn(r, c), p);
  return m;
}

Matrix Matrix::from_raw(int rows, int cols, std::vector<double> data, PrecisionMode p) {
  check_dims(rows, cols);
  if (data.size() != static_cast<std::size_t>(rows) * cols)
    throw ContractViolation("from_raw: data size does not match dimensions");
  Matrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.precision_ = p;
  m.data_ = std::move(data);
  round_in_place(m.data_, p, nullptr);
  return m;
}

bool Matrix::bitwise_equal(const Matrix& other) const {
  if (!same_shape(other) || precision_ != other.precision_) return false;
  return std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(double)) == 0;
}

std::vector<double>& mutable_data(Matrix& m) { return m.data_; }

Matrix matmul(const Matrix& a, const Matrix& b, PrecisionMode out_precision,
              RoundStats* stats) {
  if (a.cols() != b.rows())
    throw ContractViolation("matmul: inner dimensions disagree (" +
                            std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + ")");
  Matrix out(a.rows(), b.cols(), out_precision);
  ConstMap ma(a.data().data(), a.rows(), a.cols());
  ConstMap mb(b.data().data(), b.rows(), b.cols());
  Map mo(mutable_data(out).data(), out.rows(), out.cols());
  mo.noalias() = ma * mb;
  if (out_precision != PrecisionMode::F64) {
    auto& v = mutable_data(out);
    for (double& x : v) x = round_scalar(x, out_precision, stats);
  }
  return out;
}

Matrix round_to(const Matrix& m, PrecisionMode p, RoundStats* stats, bool propagate_inf) {
  Matrix out(m.rows(), m.cols(), p);
  auto& v = mutable_data(out);
  const auto& src = m.data();
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = round_scalar(src[i], p, stats, propagate_inf);
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows(), m.precision());
  auto& v = mutable_data(out);
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c)
      v[static_cast<std::size_t>(c) * m.rows() + r] = m(r, c);
  return out;
}

namespace {

template <typename F>
Matrix zip(const Matrix& a, const Matrix& b, PrecisionMode out_p, F f, const char* op) {
  if (!a.same_shape(b)) throw ContractViolation(std::string(op) + ": shape mismatch");
  Matrix out(a.rows(), a.cols(), out_p);
  auto& v = mutable_data(out);
  const auto& da = a.data();
  const auto& db = b.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = round_scalar(f(da[i], db[i]), out_p);
  return out;
}

}  // namespace

Matrix add(const Matrix& a, const Matrix& b, PrecisionMode out_p) {
  return zip(a, b, out_p, [](double x, double y) { return x + y; }, "add");
}

Matrix sub(const Matrix& a, const Matrix& b, PrecisionMode out_p) {
  return zip(a, b, out_p, [](double x, double y) { return x - y; }, "sub");
}

Matrix hadamard(const Matrix& a, const Matrix& b, PrecisionMode out_p) {
  return zip(a, b, out_p, [](double x, double y) { return x * y; }, "hadamard");
}

Matrix scale(const Matrix& m, double s, PrecisionMode out_p) {
  Matrix out(m.rows(), m.cols(), out_p);
  auto& v = mutable_data(out);
  const auto& d = m.data();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = round_scalar(s * d[i], out_p);
  return out;
}

double frobenius_norm(const Matrix& m) {
  ConstMap mm(m.data().data(), m.rows(), m.cols());
  return mm.norm();
}

double max_abs(const Matrix& m) {
  double mx = 0.0;
  for (double x : m.data()) mx = std::max(mx, std::fabs(x));
  return mx;
}

double rel_fro_error(const Matrix& a, const Matrix& ref) {
  if (!a.same_shape(ref)) throw ContractViolation("rel_fro_error: shape mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double d = a.data()[i] - ref.data()[i];
    num += d * d;
    den += ref.data()[i] * ref.data()[i];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

double rel_max_deviation(const Matrix& a, const Matrix& ref) {
  if (!a.same_shape(ref)) throw ContractViolation("rel_max_deviation: shape mismatch");
  double num = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    num = std::max(num, std::fabs(a.data()[i] - ref.data()[i]));
  const double den = max_abs(ref);
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

double dot_flat(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw ContractViolation("dot_flat: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

}  // namespace upm

#include "upm/decomp.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "upm/error.hpp"

namespace upm {
namespace {

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const EigenRowMajor>;

void require_f64(const Matrix& m, const char* op) {
  if (m.precision() != PrecisionMode::F64)
    throw ContractViolation(std::string(op) + ": requires an F64 matrix; round up first");
  if (m.empty()) throw ContractViolation(std::string(op) + ": empty matrix");
}

Matrix to_matrix(const Eigen::MatrixXd& e) {
  Matrix out(static_cast<int>(e.rows()), static_cast<int>(e.cols()));
  auto& v = mutable_data(out);
  for (int r = 0; r < e.rows(); ++r)
    for (int c = 0; c < e.cols(); ++c)
      v[static_cast<std::size_t>(r) * e.cols() + c] = e(r, c);
  return out;
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
  return ConstMap(m.data().data(), m.rows(), m.cols());
}

Eigen::JacobiSVD<Eigen::MatrixXd> full_svd(const Matrix& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> s(to_eigen(m),
                                      Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (s.info() != Eigen::Success)
    throw NumericalError("svd: did not converge");
  return s;
}

}  // namespace

QrResult qr_decompose(const Matrix& m) {
  require_f64(m, "qr_decompose");
  Eigen::MatrixXd a = to_eigen(m);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.rows());
  Eigen::MatrixXd r = qr.matrixQR().topRows(std::min(m.rows(), m.cols()))
                          .triangularView<Eigen::Upper>();
  // Return R with the full rows x cols shape so q * r reconstructs m.
  Eigen::MatrixXd r_full = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  r_full.topRows(r.rows()) = r;
  return {to_matrix(q), to_matrix(r_full)};
}

SvdResult svd(const Matrix& m) {
  require_f64(m, "svd");
  auto s = full_svd(m);
  SvdResult out;
  out.u = to_matrix(s.matrixU());
  out.v = to_matrix(s.matrixV());
  out.singular_values.assign(s.singularValues().data(),
                             s.singularValues().data() + s.singularValues().size());
  return out;
}

double spectral_norm(const Matrix& m) {
  require_f64(m, "spectral_norm");
  Eigen::JacobiSVD<Eigen::MatrixXd> s(to_eigen(m));
  return s.singularValues()(0);
}

double spectral_norm_estimate(const Matrix& m, int iters) {
  ConstMap a(m.data().data(), m.rows(), m.cols());
  Eigen::VectorXd v(m.cols());
  // Fixed, mildly uneven start vector keeps the estimate deterministic.
  for (int i = 0; i < m.cols(); ++i) v(i) = 1.0 + 1e-3 * (i % 7);
  v.normalize();
  double sigma = 0.0;
  for (int k = 0; k < iters; ++k) {
    Eigen::VectorXd w = a.transpose() * (a * v);
    const double n = w.norm();
    if (n == 0.0) return 0.0;
    v = w / n;
    sigma = std::sqrt(n);
  }
  return sigma;
}

double condition_number(const Matrix& m) {
  require_f64(m, "condition_number");
  Eigen::JacobiSVD<Eigen::MatrixXd> s(to_eigen(m));
  const auto& sv = s.singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

Matrix pinv(const Matrix& m, double rcond) {
  require_f64(m, "pinv");
  auto s = full_svd(m);
  const auto& sv = s.singularValues();
  const double cutoff = rcond * (sv.size() > 0 ? sv(0) : 0.0);
  Eigen::MatrixXd inv_s = Eigen::MatrixXd::Zero(m.cols(), m.rows());
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) inv_s(i, i) = 1.0 / sv(i);
  Eigen::MatrixXd p = s.matrixV() * inv_s * s.matrixU().transpose();
  return to_matrix(p);
}

Matrix solve_least_squares(const Matrix& a, const Matrix& b, double rcond) {
  require_f64(a, "solve_least_squares");
  require_f64(b, "solve_least_squares");
  if (a.rows() != b.rows())
    throw ContractViolation("solve_least_squares: row counts disagree");
  Eigen::JacobiSVD<Eigen::MatrixXd> s(to_eigen(a),
                                      Eigen::ComputeThinU | Eigen::ComputeThinV);
  s.setThreshold(rcond);
  return to_matrix(s.solve(to_eigen(b)));
}

int numerical_rank(const Matrix& m, double rcond) {
  require_f64(m, "numerical_rank");
  Eigen::JacobiSVD<Eigen::MatrixXd> s(to_eigen(m));
  const auto& sv = s.singularValues();
  if (sv.size() == 0) return 0;
  const double cutoff = rcond * sv(0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return rank;
}

}  // namespace upm

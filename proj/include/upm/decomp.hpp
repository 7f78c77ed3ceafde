#pragma once

#include "upm/matrix.hpp"

namespace upm {

struct QrResult {
  Matrix q;  // rows x rows, orthogonal
  Matrix r;  // rows x cols, upper triangular
};

struct SvdResult {
  Matrix u;                           // rows x rows
  std::vector<double> singular_values;  // descending, length min(rows, cols)
  Matrix v;                           // cols x cols
};

// Decompositions require F64 inputs; callers up-cast first.
QrResult qr_decompose(const Matrix& m);
SvdResult svd(const Matrix& m);

double spectral_norm(const Matrix& m);  // exact, via SVD
// Deterministic power-iteration estimate of ||m||_2 (no SVD); slight
// underestimate, adequate for trajectory recording.
double spectral_norm_estimate(const Matrix& m, int iters = 60);
double condition_number(const Matrix& m);

// Moore-Penrose pseudo-inverse with singular values below
// rcond * sigma_max treated as zero.
Matrix pinv(const Matrix& m, double rcond = 1e-10);
// Minimizer of ||a x - b||_F (min-norm solution when rank-deficient).
Matrix solve_least_squares(const Matrix& a, const Matrix& b, double rcond = 1e-10);
// Numerical rank: count of singular values above rcond * sigma_max.
int numerical_rank(const Matrix& m, double rcond = 1e-10);

}  // namespace upm

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "upm/decomp.hpp"
#include "upm/error.hpp"
#include "upm/matrix.hpp"
#include "upm/matrix_io.hpp"
#include "upm/precision.hpp"
#include "upm/rng.hpp"

using namespace upm;

namespace {

// Plain triple-loop product, independent of the Eigen-backed path.
Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  std::vector<double> buf(static_cast<std::size_t>(a.rows()) * b.cols(), 0.0);
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (int j = 0; j < b.cols(); ++j)
        buf[static_cast<std::size_t>(i) * b.cols() + j] += aik * b(k, j);
    }
  return Matrix::from_raw(a.rows(), b.cols(), std::move(buf));
}

}  // namespace

TEST_CASE("rng determinism and splitting") {
  Rng a(1234), b(1234);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  // split is independent of parent consumption
  Rng c(77), d(77);
  for (int i = 0; i < 10; ++i) (void)c.next_u64();
  Rng cs = c.split(5), ds = d.split(5);
  for (int i = 0; i < 100; ++i) CHECK(cs.next_u64() == ds.next_u64());

  // distinct streams diverge
  Rng s0 = c.split(0), s1 = c.split(1);
  CHECK(s0.next_u64() != s1.next_u64());
}

TEST_CASE("rng gaussian moments") {
  Rng rng(42);
  const int n = 100000;
  double sum = 0, sum2 = 0, sum3 = 0, sum4 = 0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sum2 += g * g;
    sum3 += g * g * g;
    sum4 += g * g * g * g;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  const double skew = sum3 / n;            // ~N(0, 15/n) for standard normal
  const double kurt = sum4 / n;            // expect 3
  CHECK(std::fabs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::fabs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));
  CHECK(std::fabs(skew) < 3.0 * std::sqrt(15.0 / n));
  CHECK(std::fabs(kurt - 3.0) < 3.0 * std::sqrt(96.0 / n));
}

TEST_CASE("unit roundoff values") {
  CHECK(unit_roundoff(PrecisionMode::F64) == doctest::Approx(1.1102230246251565e-16));
  CHECK(unit_roundoff(PrecisionMode::F32) == doctest::Approx(5.960464477539063e-08));
  CHECK(unit_roundoff(PrecisionMode::F16) == doctest::Approx(4.8828125e-04));
  CHECK(unit_roundoff(PrecisionMode::BF16) == doctest::Approx(3.90625e-03));
}

TEST_CASE("round_scalar basics") {
  // 1.0 is on every grid
  for (auto p : {PrecisionMode::F64, PrecisionMode::F32, PrecisionMode::F16,
                 PrecisionMode::BF16})
    CHECK(round_scalar(1.0, p) == 1.0);

  // F32 grid agrees with the native float cast
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double x = std::ldexp(rng.gaussian(), static_cast<int>(rng.uniform_index(60)) - 30);
    CHECK(round_scalar(x, PrecisionMode::F32) ==
          static_cast<double>(static_cast<float>(x)));
  }

  // idempotence on random values
  for (auto p : {PrecisionMode::F32, PrecisionMode::F16, PrecisionMode::BF16})
    for (int i = 0; i < 1000; ++i) {
      const double x = rng.gaussian() * 100.0;
      const double once = round_scalar(x, p);
      CHECK(round_scalar(once, p) == once);
    }

  // 0.1 at BF16 lands on the nearest grid neighbour:
  // bracketing grid points around 0.1 have spacing 2^(floor(log2 0.1)) * 2^-7
  const double r = round_scalar(0.1, PrecisionMode::BF16);
  const double spacing = std::ldexp(1.0, -4 - 7);
  CHECK(std::fabs(r - 0.1) <= 0.5 * spacing);
  // enumerate the two bracketing grid points explicitly
  const double lo = std::floor(0.1 / spacing) * spacing;
  const double hi = lo + spacing;
  CHECK((r == lo || r == hi));
  CHECK(std::fabs(r - 0.1) <= std::min(std::fabs(lo - 0.1), std::fabs(hi - 0.1)));

  // overflow clamps and counts
  RoundStats stats;
  const double big = 1e30;
  CHECK(round_scalar(big, PrecisionMode::F16, &stats) == 65504.0);
  CHECK(stats.overflow_count == 1);
  CHECK(std::isinf(round_scalar(big, PrecisionMode::F16, nullptr, true)));
  // negative side
  CHECK(round_scalar(-big, PrecisionMode::F16) == -65504.0);
}

TEST_CASE("matmul identity and 1x1") {
  Rng rng(9);
  Matrix m = Matrix::gaussian(3, 5, rng);
  Matrix id = Matrix::identity(3);
  Matrix prod = matmul(id, m);
  CHECK(prod.bitwise_equal(m));

  Matrix a = Matrix::constant(1, 1, 2.0);
  Matrix b = Matrix::constant(1, 1, 3.0);
  CHECK(matmul(a, b)(0, 0) == 6.0);

  CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), ContractViolation);
}

TEST_CASE("matmul accumulates at F64 then rounds, matches naive oracle") {
  Rng rng(10);
  Matrix a = Matrix::gaussian(17, 23, rng);
  Matrix b = Matrix::gaussian(23, 11, rng);
  Matrix ours = matmul(a, b);
  Matrix oracle = naive_matmul(a, b);
  CHECK(rel_fro_error(ours, oracle) < 1e-14);

  Matrix rounded = matmul(a, b, PrecisionMode::BF16);
  Matrix oracle_rounded = round_to(oracle, PrecisionMode::BF16);
  // same grid; tiny accumulation-order differences may flip a tie
  CHECK(rel_fro_error(rounded, oracle_rounded) < 1e-3);
  CHECK(rounded.precision() == PrecisionMode::BF16);
  // output satisfies the grid invariant
  Matrix again = round_to(rounded, PrecisionMode::BF16);
  CHECK(again.bitwise_equal(rounded));
}

TEST_CASE("matmul error bound: single product at BF16") {
  Rng rng(11);
  const int d = 64;
  Matrix a = Matrix::gaussian(d, d, rng);
  Matrix b = Matrix::gaussian(d, d, rng);
  Matrix exact = matmul(a, b);
  Matrix low = matmul(round_to(a, PrecisionMode::BF16), round_to(b, PrecisionMode::BF16),
                      PrecisionMode::BF16);
  const double u = unit_roundoff(PrecisionMode::BF16);
  const double gamma = d * u / (1.0 - d * u);
  const double bound = gamma * condition_number(a) * condition_number(b);
  const double measured =
      spectral_norm(sub(low, exact)) / spectral_norm(exact);
  CHECK(measured <= bound);
}

TEST_CASE("matmul error bound: 1000 trials per precision") {
  const int d = 24;
  int trial_seed = 0;
  for (auto p : {PrecisionMode::F32, PrecisionMode::F16, PrecisionMode::BF16}) {
    const double u = unit_roundoff(p);
    const double gamma = d * u / (1.0 - d * u);
    for (int t = 0; t < 1000; ++t) {
      Rng rng(100000 + (trial_seed++));
      Matrix a = Matrix::gaussian(d, d, rng, 0.5);
      Matrix b = Matrix::gaussian(d, d, rng, 0.5);
      Matrix exact = matmul(a, b);
      Matrix low = matmul(round_to(a, p), round_to(b, p), p);
      const double bound = gamma * condition_number(a) * condition_number(b);
      const double measured = spectral_norm(sub(low, exact)) / spectral_norm(exact);
      REQUIRE(measured <= bound);
    }
  }
}

TEST_CASE("qr: identity and random reconstruction") {
  Matrix id = Matrix::identity(4);
  auto [q, r] = qr_decompose(id);
  // Q and R are the identity up to column signs
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double expect = (i == j) ? 1.0 : 0.0;
      CHECK(std::fabs(std::fabs(q(i, j)) - expect) < 1e-14);
      CHECK(std::fabs(std::fabs(r(i, j)) - expect) < 1e-14);
    }

  Rng rng(12);
  Matrix m = Matrix::gaussian(128, 128, rng);
  auto res = qr_decompose(m);
  Matrix qtq = matmul(transpose(res.q), res.q);
  CHECK(max_abs(sub(qtq, Matrix::identity(128))) < 1e-12);
  CHECK(rel_fro_error(matmul(res.q, res.r), m) < 1e-10);
  // R upper triangular
  for (int i = 0; i < 128; ++i)
    for (int j = 0; j < i; ++j) CHECK(res.r(i, j) == 0.0);

  CHECK_THROWS_AS(qr_decompose(round_to(m, PrecisionMode::F32)), ContractViolation);
}

TEST_CASE("svd: diag and random reconstruction") {
  Matrix d3 = Matrix::from_fn(3, 3, [](int r, int c) {
    if (r != c) return 0.0;
    return static_cast<double>(3 - r);
  });
  auto s = svd(d3);
  CHECK(s.singular_values[0] == doctest::Approx(3.0));
  CHECK(s.singular_values[1] == doctest::Approx(2.0));
  CHECK(s.singular_values[2] == doctest::Approx(1.0));

  Rng rng(13);
  Matrix m = Matrix::gaussian(128, 128, rng);
  auto r = svd(m);
  CHECK(max_abs(sub(matmul(transpose(r.u), r.u), Matrix::identity(128))) < 1e-12);
  CHECK(max_abs(sub(matmul(transpose(r.v), r.v), Matrix::identity(128))) < 1e-12);
  for (std::size_t i = 1; i < r.singular_values.size(); ++i)
    CHECK(r.singular_values[i] <= r.singular_values[i - 1]);
  Matrix sigma = Matrix::from_fn(128, 128, [&](int i, int j) {
    return i == j ? r.singular_values[i] : 0.0;
  });
  Matrix recon = matmul(matmul(r.u, sigma), transpose(r.v));
  CHECK(rel_fro_error(recon, m) < 1e-10);
}

TEST_CASE("spectral norm estimate tracks exact value") {
  Rng rng(14);
  for (int t = 0; t < 5; ++t) {
    Matrix m = Matrix::gaussian(60, 60, rng);
    const double exact = spectral_norm(m);
    const double est = spectral_norm_estimate(m);
    CHECK(est <= exact * (1.0 + 1e-9));
    CHECK(est >= exact * 0.98);
  }
}

TEST_CASE("pinv and least squares") {
  Rng rng(15);
  Matrix a = Matrix::gaussian(40, 20, rng);
  Matrix x_true = Matrix::gaussian(20, 7, rng);
  Matrix b = matmul(a, x_true);
  Matrix x1 = matmul(pinv(a), b);
  Matrix x2 = solve_least_squares(a, b);
  CHECK(rel_fro_error(x1, x_true) < 1e-10);
  CHECK(rel_fro_error(x2, x_true) < 1e-10);
  CHECK(numerical_rank(a) == 20);

  // rank-deficient
  Matrix low = matmul(Matrix::gaussian(40, 5, rng), Matrix::gaussian(5, 20, rng));
  CHECK(numerical_rank(low) == 5);
}

TEST_CASE("matrix container round trip") {
  Rng rng(16);
  Matrix m = round_to(Matrix::gaussian(9, 13, rng), PrecisionMode::F16);
  const auto path = std::filesystem::temp_directory_path() / "upm_test_matrix.upmm";
  write_matrix(path, m);
  Matrix back = read_matrix(path);
  CHECK(back.bitwise_equal(m));
  CHECK(back.precision() == PrecisionMode::F16);
  std::filesystem::remove(path);
}

TEST_CASE("matrix csv round trip") {
  Rng rng(17);
  Matrix m = Matrix::gaussian(5, 4, rng);
  const auto path = std::filesystem::temp_directory_path() / "upm_test_matrix.csv";
  write_matrix_csv(path, m);
  Matrix back = read_matrix_csv(path);
  CHECK(back.bitwise_equal(m));
  std::filesystem::remove(path);
}

TEST_CASE("determinism: full pipeline bit-identical across runs") {
  auto run = [] {
    Rng rng(20260101);
    Matrix a = Matrix::gaussian(32, 32, rng);
    Matrix b = Matrix::gaussian(32, 32, rng);
    Matrix c = matmul(a, b, PrecisionMode::F32);
    auto q = qr_decompose(round_to(c, PrecisionMode::F64));
    return matmul(q.q, q.r, PrecisionMode::BF16);
  };
  Matrix first = run();
  Matrix second = run();
  CHECK(first.bitwise_equal(second));
}

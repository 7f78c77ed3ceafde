#include "upm/transform.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "upm/decomp.hpp"
#include "upm/error.hpp"
#include "upm/matrix_io.hpp"

namespace upm {
namespace {

Matrix haar_matrix(int d, Rng& rng) {
  Matrix g = Matrix::gaussian(d, d, rng);
  auto [q, r] = qr_decompose(g);
  // Fix column signs by the sign of R's diagonal so the distribution is
  // exactly Haar rather than QR-convention dependent.
  std::vector<double> data(q.data());
  for (int j = 0; j < d; ++j) {
    if (r(j, j) < 0.0)
      for (int i = 0; i < d; ++i) data[static_cast<std::size_t>(i) * d + j] = -data[static_cast<std::size_t>(i) * d + j];
  }
  return Matrix::from_raw(d, d, std::move(data));
}

Matrix assemble_udv(const Matrix& u, const std::vector<double>& diag, const Matrix& v) {
  const int d = u.rows();
  Matrix ud = Matrix::from_fn(d, d, [&](int i, int j) { return u(i, j) * diag[j]; });
  return matmul(ud, transpose(v));
}

}  // namespace

Transform haar_orthogonal(int d, Rng& rng) {
  if (d < 1) throw ContractViolation("haar_orthogonal: d must be >= 1");
  Transform t;
  t.seed = rng.seed();
  t.forward = haar_matrix(d, rng);
  t.inverse = transpose(t.forward);
  t.kind = TransformKind::HaarOrthogonal;
  return t;
}

Transform low_cond(int d, double epsilon, double scale, Rng& rng) {
  if (d < 1) throw ContractViolation("low_cond: d must be >= 1");
  if (epsilon < 0.0) throw ContractViolation("low_cond: epsilon must be >= 0");
  if (scale <= 0.0) throw ContractViolation("low_cond: scale must be > 0");
  Matrix u = haar_matrix(d, rng);
  Matrix v = haar_matrix(d, rng);
  std::vector<double> diag(d), inv_diag(d);
  for (int i = 0; i < d; ++i) {
    const double e = rng.uniform(-epsilon, epsilon);
    diag[i] = scale * std::exp(e);
    inv_diag[i] = std::exp(-e) / scale;
  }
  Transform t;
  t.seed = rng.seed();
  t.kind = TransformKind::LowCondition;
  t.epsilon = epsilon;
  t.scale = scale;
  t.forward = assemble_udv(u, diag, v);
  t.inverse = assemble_udv(v, inv_diag, u);
  return t;
}

Transform conditioned_spectrum(int d, double kappa, Rng& rng, bool symmetric) {
  if (d < 1) throw ContractViolation("conditioned_spectrum: d must be >= 1");
  if (kappa < 1.0) throw ContractViolation("conditioned_spectrum: kappa must be >= 1");
  Matrix u = haar_matrix(d, rng);
  Matrix v = symmetric ? u : haar_matrix(d, rng);
  const double half_log = 0.5 * std::log(kappa);
  std::vector<double> diag(d), inv_diag(d);
  for (int i = 0; i < d; ++i) {
    const double f = (d == 1) ? 0.0 : (2.0 * i / (d - 1.0) - 1.0);  // in [-1, 1]
    diag[i] = std::exp(half_log * f);
    inv_diag[i] = std::exp(-half_log * f);
  }
  Transform t;
  t.seed = rng.seed();
  t.kind = TransformKind::LowCondition;
  t.epsilon = half_log;
  t.scale = 1.0;
  t.forward = assemble_udv(u, diag, v);
  t.inverse = assemble_udv(v, inv_diag, u);
  return t;
}

Transform identity_transform(int d) {
  Transform t;
  t.forward = Matrix::identity(d);
  t.inverse = Matrix::identity(d);
  t.kind = TransformKind::HaarOrthogonal;
  return t;
}

Transform compose(const Transform& first, const Transform& second) {
  if (first.dim() != second.dim())
    throw ContractViolation("compose: dimension mismatch");
  Transform t;
  t.forward = matmul(first.forward, second.forward);
  t.inverse = matmul(second.inverse, first.inverse);
  t.kind = (first.kind == TransformKind::HaarOrthogonal &&
            second.kind == TransformKind::HaarOrthogonal)
               ? TransformKind::HaarOrthogonal
               : TransformKind::LowCondition;
  t.epsilon = first.epsilon + second.epsilon;
  t.scale = first.scale * second.scale;
  t.seed = first.seed ^ (second.seed * 0x9e3779b97f4a7c15ULL);
  return t;
}

Transform inverted(const Transform& t) {
  Transform out = t;
  out.forward = t.inverse;
  out.inverse = t.forward;
  out.scale = t.scale > 0.0 ? 1.0 / t.scale : t.scale;
  return out;
}

double scale_schedule(long step, double base_scale) {
  if (base_scale <= 0.0) throw ContractViolation("scale_schedule: base_scale must be > 0");
  return (step % 2 == 0) ? base_scale : 1.0 / base_scale;
}

ScrambleStats scramble_stats(const Matrix& w, std::span<const Transform> chain) {
  Matrix wp = w;
  for (const Transform& t : chain) wp = matmul(wp, t.forward);
  ScrambleStats s;
  s.rel_frobenius = rel_fro_error(wp, w);
  const double denom = frobenius_norm(w) * frobenius_norm(wp);
  s.cosine = denom == 0.0 ? 1.0 : dot_flat(w, wp) / denom;
  return s;
}

void write_transform(const std::filesystem::path& prefix, const Transform& t) {
  nlohmann::json header;
  header["kind"] = t.kind == TransformKind::HaarOrthogonal ? "haar" : "lowcond";
  header["epsilon"] = t.epsilon;
  header["scale"] = t.scale;
  header["seed"] = t.seed;
  header["dim"] = t.dim();
  std::ofstream out(prefix.string() + ".json");
  if (!out) throw NumericalError("cannot write transform header");
  out << header.dump(2) << "\n";
  write_matrix(prefix.string() + ".fwd.upmm", t.forward);
  write_matrix(prefix.string() + ".inv.upmm", t.inverse);
}

Transform read_transform(const std::filesystem::path& prefix) {
  std::ifstream in(prefix.string() + ".json");
  if (!in) throw NumericalError("cannot read transform header");
  nlohmann::json header = nlohmann::json::parse(in);
  Transform t;
  t.kind = header.at("kind").get<std::string>() == "haar" ? TransformKind::HaarOrthogonal
                                                          : TransformKind::LowCondition;
  t.epsilon = header.at("epsilon").get<double>();
  t.scale = header.at("scale").get<double>();
  t.seed = header.at("seed").get<std::uint64_t>();
  t.forward = read_matrix(prefix.string() + ".fwd.upmm");
  t.inverse = read_matrix(prefix.string() + ".inv.upmm");
  return t;
}

}  // namespace upm

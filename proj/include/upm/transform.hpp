#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "upm/matrix.hpp"
#include "upm/rng.hpp"

namespace upm {

enum class TransformKind : std::uint8_t { HaarOrthogonal = 0, LowCondition = 1 };

// An invertible square matrix together with its exactly-known inverse.
// Inverses always come from the generating factors (transpose for
// orthogonal, reassembled SVD factors for the low-condition family), never
// from numerical inversion of the product.
struct Transform {
  Matrix forward;
  Matrix inverse;
  TransformKind kind = TransformKind::HaarOrthogonal;
  double epsilon = 0.0;
  double scale = 1.0;
  std::uint64_t seed = 0;

  int dim() const { return forward.rows(); }
};

// Haar-distributed orthogonal matrix: QR of a standard-normal matrix with
// column signs fixed by the sign of R's diagonal. inverse == transpose.
Transform haar_orthogonal(int d, Rng& rng);

// U diag(scale * e^{u_i}) V^T with U,V Haar and u_i ~ Uniform[-epsilon, epsilon].
// Singular values lie in [scale*e^-eps, scale*e^+eps]; condition <= e^{2 eps}.
Transform low_cond(int d, double epsilon, double scale, Rng& rng);

// Deterministic log-spaced spectrum spanning exactly [1/sqrt(kappa), sqrt(kappa)]
// (condition number exactly kappa). With symmetric=true the result is
// U D U^T, so powers of the transform have condition kappa^n. Used by the
// error-growth benches to realize a pinned kappa.
Transform conditioned_spectrum(int d, double kappa, Rng& rng, bool symmetric = false);

Transform identity_transform(int d);
// Composite acting as x -> (x * first) * second; inverse composed from the
// stored factor inverses.
Transform compose(const Transform& first, const Transform& second);
// Same matrices with forward/inverse swapped (undoes a fold).
Transform inverted(const Transform& t);

// Alternates base_scale and 1/base_scale by step parity so consecutive
// pairs have unit geometric-mean scale.
double scale_schedule(long step, double base_scale);

struct ScrambleStats {
  double rel_frobenius = 0.0;  // ||W - W'||_F / ||W||_F
  double cosine = 1.0;         // flattened-weight cosine similarity
};

// W' = W * T_1 * ... * T_n at F64.
ScrambleStats scramble_stats(const Matrix& w, std::span<const Transform> chain);

// Serialization: <prefix>.json header (kind, epsilon, scale, seed) plus
// <prefix>.fwd.upmm / <prefix>.inv.upmm matrix containers.
void write_transform(const std::filesystem::path& prefix, const Transform& t);
Transform read_transform(const std::filesystem::path& prefix);

}  // namespace upm

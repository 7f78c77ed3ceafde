#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "upm/matrix.hpp"

namespace upm {

// Activations are (batch * seq, dim) row-major; sequence structure is
// metadata used only where attention or convolution needs it.
struct ActShape {
  int batch = 1;
  int seq = 1;
  int rows() const { return batch * seq; }
};

enum class SlotRole : std::uint8_t { EntryWeight, ExitWeight, Accumulator, NormAccumulator };
enum class MorphRule : std::uint8_t { LeftInverse, Right, TwoSided, KroneckerLeft };

// A named weight matrix with its morphing behaviour. Accumulators exist to
// absorb boundary transforms and are never optimized.
struct WeightSlot {
  std::string name;
  Matrix value;
  SlotRole role = SlotRole::EntryWeight;
  MorphRule rule = MorphRule::LeftInverse;
  int conv_patch = 1;  // KroneckerLeft folds only
  bool trainable = true;
};

MorphRule default_rule_for(SlotRole role, int conv_patch);
WeightSlot make_slot(std::string name, Matrix value, SlotRole role, int conv_patch = 1);

enum class PhiKind : std::uint8_t { PassThrough, Relu, ReluSquared, Silu };

// g(X) = phi(norm(X Q) X U) V with every piece optional except phi:
//   - norm_q:  rms-normalization accumulator applied before the entry matmul
//   - entry:   U (or an entry-side accumulator)
//   - exit:    V (or an exit-side accumulator)
// conv_patch > 1 evaluates the entry over im2col(X) and folds transforms as
// (I_P (x) T^-1) U.
struct Subfunction {
  std::optional<WeightSlot> norm_q;
  std::optional<WeightSlot> entry;
  PhiKind phi = PhiKind::PassThrough;
  std::optional<WeightSlot> exit;
  int in_dim = 0;
  int out_dim = 0;
  int conv_patch = 1;
};

// Validates dimension chaining, the at-most-one-accumulator rule, and
// role/rule agreement.
Subfunction make_subfunction(std::optional<WeightSlot> norm_q, std::optional<WeightSlot> entry,
                             PhiKind phi, std::optional<WeightSlot> exit, int in_dim,
                             int conv_patch = 1);

Matrix eval_subfunction(const Subfunction& g, const Matrix& x, PrecisionMode p,
                        const ActShape& shape = {});

// Row-wise (d^-1 ||row of X Q||^2)^(-1/2) times X. The feature scale is not
// applied here; it is absorbed into the following entry weight. Zero rows
// are guarded by a 1e-30 floor on the rms.
Matrix rmsnorm_acc(const Matrix& x, const Matrix& q);

// (I_P (x) T_inv) * U via P block multiplications.
Matrix fold_conv_entry(const Matrix& u, const Matrix& t_inv, int patch);

// 1-D patch extraction with zero padding, centered offsets, per sequence.
Matrix im2col_1d(const Matrix& x, int patch, const ActShape& shape);

Matrix apply_phi(PhiKind phi, const Matrix& z, PrecisionMode p);
double phi_derivative(PhiKind phi, double pre);

}  // namespace upm

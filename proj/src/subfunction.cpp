#include "upm/subfunction.hpp"

#include <cmath>

#include "upm/error.hpp"

namespace upm {

MorphRule default_rule_for(SlotRole role, int conv_patch) {
  switch (role) {
    case SlotRole::EntryWeight:
      return conv_patch > 1 ? MorphRule::KroneckerLeft : MorphRule::LeftInverse;
    case SlotRole::ExitWeight:
      return MorphRule::Right;
    case SlotRole::Accumulator:
      return MorphRule::TwoSided;
    case SlotRole::NormAccumulator:
      return MorphRule::LeftInverse;
  }
  return MorphRule::LeftInverse;
}

WeightSlot make_slot(std::string name, Matrix value, SlotRole role, int conv_patch) {
  WeightSlot s;
  s.name = std::move(name);
  s.value = std::move(value);
  s.role = role;
  s.conv_patch = conv_patch;
  s.rule = default_rule_for(role, conv_patch);
  s.trainable = role == SlotRole::EntryWeight || role == SlotRole::ExitWeight;
  return s;
}

Subfunction make_subfunction(std::optional<WeightSlot> norm_q, std::optional<WeightSlot> entry,
                             PhiKind phi, std::optional<WeightSlot> exit, int in_dim,
                             int conv_patch) {
  if (in_dim < 1) throw ContractViolation("subfunction: in_dim must be >= 1");
  if (conv_patch < 1) throw ContractViolation("subfunction: conv_patch must be >= 1");
  const bool entry_acc = entry && entry->role == SlotRole::Accumulator;
  const bool exit_acc = exit && exit->role == SlotRole::Accumulator;
  if (entry_acc && exit_acc)
    throw ContractViolation(
        "subfunction: entry and exit cannot both be identity accumulators");
  if (norm_q) {
    if (norm_q->role != SlotRole::NormAccumulator)
      throw ContractViolation("subfunction: norm slot must be a NormAccumulator");
    if (norm_q->value.rows() != norm_q->value.cols() || norm_q->value.rows() != in_dim)
      throw ContractViolation("subfunction: norm accumulator must be in_dim x in_dim");
  }
  int mid_dim = in_dim;
  if (entry) {
    if (entry->role == SlotRole::NormAccumulator)
      throw ContractViolation("subfunction: entry slot cannot be a NormAccumulator");
    if (entry->value.rows() != conv_patch * in_dim)
      throw ContractViolation("subfunction: entry rows must equal conv_patch * in_dim");
    mid_dim = entry->value.cols();
    if (conv_patch > 1 && entry->rule != MorphRule::KroneckerLeft)
      throw ContractViolation("subfunction: convolution entry must use KroneckerLeft");
  } else if (conv_patch > 1) {
    throw ContractViolation("subfunction: conv_patch > 1 requires an entry weight");
  }
  int out_dim = mid_dim;
  if (exit) {
    if (exit->role == SlotRole::NormAccumulator)
      throw ContractViolation("subfunction: exit slot cannot be a NormAccumulator");
    if (exit->value.rows() != mid_dim)
      throw ContractViolation("subfunction: exit rows must equal entry output dim");
    out_dim = exit->value.cols();
  }
  Subfunction g;
  g.norm_q = std::move(norm_q);
  g.entry = std::move(entry);
  g.phi = phi;
  g.exit = std::move(exit);
  g.in_dim = in_dim;
  g.out_dim = out_dim;
  g.conv_patch = conv_patch;
  return g;
}

Matrix rmsnorm_acc(const Matrix& x, const Matrix& q) {
  if (q.rows() != q.cols()) throw ContractViolation("rmsnorm_acc: q must be square");
  if (q.rows() != x.cols()) throw ContractViolation("rmsnorm_acc: q.rows must equal x.cols");
  Matrix z = matmul(x, q);
  const int d = x.cols();
  Matrix out(x.rows(), x.cols());
  auto& v = mutable_data(out);
  for (int r = 0; r < x.rows(); ++r) {
    double ss = 0.0;
    for (int c = 0; c < d; ++c) ss += z(r, c) * z(r, c);
    const double rms = std::max(std::sqrt(ss / d), 1e-30);
    const double inv = 1.0 / rms;
    for (int c = 0; c < d; ++c)
      v[static_cast<std::size_t>(r) * d + c] = x(r, c) * inv;
  }
  return out;
}

Matrix fold_conv_entry(const Matrix& u, const Matrix& t_inv, int patch) {
  if (t_inv.rows() != t_inv.cols())
    throw ContractViolation("fold_conv_entry: t_inv must be square");
  if (u.rows() != patch * t_inv.rows())
    throw ContractViolation("fold_conv_entry: u.rows must equal patch * t_inv.rows");
  const int d = t_inv.rows();
  Matrix out(u.rows(), u.cols());
  auto& v = mutable_data(out);
  for (int b = 0; b < patch; ++b) {
    // block rows [b*d, (b+1)*d) of out = t_inv * same rows of u
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < u.cols(); ++j) {
        double acc = 0.0;
        for (int k = 0; k < d; ++k) acc += t_inv(i, k) * u(b * d + k, j);
        v[static_cast<std::size_t>(b * d + i) * u.cols() + j] = acc;
      }
  }
  return out;
}

Matrix im2col_1d(const Matrix& x, int patch, const ActShape& shape) {
  if (shape.rows() != x.rows())
    throw ContractViolation("im2col_1d: shape does not match row count");
  const int c = x.cols();
  const int half = (patch - 1) / 2;
  Matrix out(x.rows(), patch * c);
  auto& v = mutable_data(out);
  for (int b = 0; b < shape.batch; ++b)
    for (int t = 0; t < shape.seq; ++t) {
      const int row = b * shape.seq + t;
      for (int pidx = 0; pidx < patch; ++pidx) {
        const int src_t = t + pidx - half;
        if (src_t < 0 || src_t >= shape.seq) continue;  // zero padding
        const int src_row = b * shape.seq + src_t;
        for (int j = 0; j < c; ++j)
          v[static_cast<std::size_t>(row) * patch * c + pidx * c + j] = x(src_row, j);
      }
    }
  return out;
}

Matrix apply_phi(PhiKind phi, const Matrix& z, PrecisionMode p) {
  if (phi == PhiKind::PassThrough) return z;
  Matrix out(z.rows(), z.cols(), p);
  auto& v = mutable_data(out);
  const auto& src = z.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    double y = 0.0;
    const double x = src[i];
    switch (phi) {
      case PhiKind::Relu: y = x > 0.0 ? x : 0.0; break;
      case PhiKind::ReluSquared: y = x > 0.0 ? x * x : 0.0; break;
      case PhiKind::Silu: y = x / (1.0 + std::exp(-x)); break;
      case PhiKind::PassThrough: y = x; break;
    }
    v[i] = round_scalar(y, p);
  }
  return out;
}

double phi_derivative(PhiKind phi, double pre) {
  switch (phi) {
    case PhiKind::PassThrough: return 1.0;
    case PhiKind::Relu: return pre > 0.0 ? 1.0 : 0.0;
    case PhiKind::ReluSquared: return pre > 0.0 ? 2.0 * pre : 0.0;
    case PhiKind::Silu: {
      const double s = 1.0 / (1.0 + std::exp(-pre));
      return s * (1.0 + pre * (1.0 - s));
    }
  }
  return 1.0;
}

Matrix eval_subfunction(const Subfunction& g, const Matrix& x, PrecisionMode p,
                        const ActShape& shape) {
  if (x.cols() != g.in_dim)
    throw ContractViolation("eval_subfunction: input dim mismatch");
  Matrix h = x;
  if (g.norm_q) h = round_to(rmsnorm_acc(h, g.norm_q->value), p);
  Matrix z = h;
  if (g.entry) {
    if (g.conv_patch > 1)
      z = matmul(im2col_1d(h, g.conv_patch, shape), g.entry->value, p);
    else
      z = matmul(h, g.entry->value, p);
  }
  z = apply_phi(g.phi, z, p);
  if (g.exit) z = matmul(z, g.exit->value, p);
  return z;
}

}  // namespace upm

#include "upm/transformer_block.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "eigen_util.hpp"
#include "upm/decomp.hpp"
#include "upm/error.hpp"
#include "upm/transform.hpp"

namespace upm {
namespace {

Matrix orthogonal_init(int d, Rng& rng) {
  Rng local = rng.split(0x6f727468);  // independent stream per accumulator
  return haar_orthogonal(d, local).forward;
}

}  // namespace

TransformerBlock make_transformer_block(const BlockOptions& opt, Rng& rng,
                                        const std::string& name_prefix) {
  if (opt.model_dim < 1 || opt.hidden_dim < 1)
    throw ContractViolation("transformer block: dims must be positive");
  if (opt.head_count < 1 || opt.model_dim % opt.head_count != 0)
    throw ContractViolation("transformer block: head_count must divide model_dim");
  const int d = opt.model_dim;
  const double ws = 1.0 / std::sqrt(static_cast<double>(d));
  const double hs = 1.0 / std::sqrt(static_cast<double>(opt.hidden_dim));

  TransformerBlock b;
  b.model_dim = d;
  b.head_count = opt.head_count;
  b.hidden_dim = opt.hidden_dim;
  b.swiglu = opt.swiglu;
  b.rope = opt.rope;

  auto w = [&](const std::string& n, int r, int c, double s, SlotRole role) {
    Rng local = rng.split(std::hash<std::string>{}(name_prefix + "." + n));
    return make_slot(name_prefix + "." + n, Matrix::gaussian(r, c, local, s), role);
  };
  b.u_q = w("u_q", d, d, ws, SlotRole::EntryWeight);
  b.u_k = w("u_k", d, d, ws, SlotRole::EntryWeight);
  b.u_v = w("u_v", d, d, ws, SlotRole::EntryWeight);
  b.v_o = w("v_o", d, d, ws, SlotRole::ExitWeight);
  b.u_w1 = w("u_w1", d, opt.hidden_dim, ws, SlotRole::EntryWeight);
  if (opt.swiglu) b.u_w3 = w("u_w3", d, opt.hidden_dim, ws, SlotRole::EntryWeight);
  b.v_w2 = w("v_w2", opt.hidden_dim, d, hs, SlotRole::ExitWeight);

  Rng n1 = rng.split(std::hash<std::string>{}(name_prefix + ".q_n1"));
  Rng n2 = rng.split(std::hash<std::string>{}(name_prefix + ".q_n2"));
  b.q_n1 = make_slot(name_prefix + ".q_n1", orthogonal_init(d, n1), SlotRole::NormAccumulator);
  b.q_n2 = make_slot(name_prefix + ".q_n2", orthogonal_init(d, n2), SlotRole::NormAccumulator);
  b.q_skip1 = make_slot(name_prefix + ".q_1", Matrix::identity(d), SlotRole::Accumulator);
  b.q_skip2 = make_slot(name_prefix + ".q_2", Matrix::identity(d), SlotRole::Accumulator);
  return b;
}

void apply_rope(Matrix& qk, const ActShape& shape, int head_count, bool backward) {
  const int d = qk.cols();
  const int dh = d / head_count;
  const int half_pairs = dh / 2;
  auto& v = mutable_data(qk);
  for (int b = 0; b < shape.batch; ++b)
    for (int t = 0; t < shape.seq; ++t) {
      const std::size_t row = static_cast<std::size_t>(b * shape.seq + t) * d;
      for (int h = 0; h < head_count; ++h)
        for (int i = 0; i < half_pairs; ++i) {
          const double theta =
              t * std::pow(10000.0, -2.0 * i / static_cast<double>(dh));
          const double c = std::cos(theta);
          const double s = backward ? -std::sin(theta) : std::sin(theta);
          const std::size_t a = row + h * dh + 2 * i;
          const double x0 = v[a], x1 = v[a + 1];
          v[a] = c * x0 - s * x1;
          v[a + 1] = s * x0 + c * x1;
        }
    }
}

namespace {

// rmsnorm_acc with the per-row scales exposed for the cache.
Matrix rmsnorm_with_cache(const Matrix& x, const Matrix& q, Matrix* z_out,
                          std::vector<double>* inv_rms_out) {
  Matrix z = matmul(x, q);
  const int d = x.cols();
  Matrix out(x.rows(), d);
  auto& v = mutable_data(out);
  std::vector<double> inv(x.rows());
  for (int r = 0; r < x.rows(); ++r) {
    double ss = 0.0;
    for (int c = 0; c < d; ++c) ss += z(r, c) * z(r, c);
    const double rms = std::max(std::sqrt(ss / d), 1e-30);
    inv[r] = 1.0 / rms;
    for (int c = 0; c < d; ++c) v[static_cast<std::size_t>(r) * d + c] = x(r, c) * inv[r];
  }
  if (z_out) *z_out = std::move(z);
  if (inv_rms_out) *inv_rms_out = std::move(inv);
  return out;
}

}  // namespace

Matrix eval_transformer_block(const TransformerBlock& b, const Matrix& x,
                              const ActShape& shape, PrecisionMode p, BlockCache* cache) {
  const int d = b.model_dim;
  if (x.cols() != d) throw ContractViolation("transformer block: input dim mismatch");
  if (shape.rows() != x.rows())
    throw ContractViolation("transformer block: shape does not match row count");
  const int h = b.head_count;
  const int dh = d / h;
  const int L = shape.seq;

  Matrix z1;
  std::vector<double> inv1;
  Matrix normed1 = round_to(rmsnorm_with_cache(x, b.q_n1.value, &z1, &inv1), p);

  Matrix q = matmul(normed1, b.u_q.value, p);
  Matrix k = matmul(normed1, b.u_k.value, p);
  Matrix v = matmul(normed1, b.u_v.value, p);
  Matrix q_rot = q, k_rot = k;
  if (b.rope) {
    apply_rope(q_rot, shape, h, false);
    apply_rope(k_rot, shape, h, false);
    q_rot = round_to(q_rot, p);
    k_rot = round_to(k_rot, p);
  }

  // Causal softmax attention per sequence and head, accumulated at F64.
  Matrix att_concat(x.rows(), d);
  std::vector<Matrix> probs;
  if (cache) probs.reserve(static_cast<std::size_t>(shape.batch) * h);
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  {
    auto qm = detail::emap(q_rot);
    auto km = detail::emap(k_rot);
    auto vm = detail::emap(v);
    auto om = detail::emap_mut(att_concat);
    for (int bb = 0; bb < shape.batch; ++bb) {
      const int r0 = bb * L;
      for (int hh = 0; hh < h; ++hh) {
        auto qh = qm.block(r0, hh * dh, L, dh);
        auto kh = km.block(r0, hh * dh, L, dh);
        auto vh = vm.block(r0, hh * dh, L, dh);
        detail::ERow scores = qh * kh.transpose() * inv_sqrt_dh;
        Matrix pmat(L, L);
        auto pm = detail::emap_mut(pmat);
        for (int i = 0; i < L; ++i) {
          double mx = -std::numeric_limits<double>::infinity();
          for (int j = 0; j <= i; ++j) mx = std::max(mx, scores(i, j));
          double denom = 0.0;
          for (int j = 0; j <= i; ++j) denom += std::exp(scores(i, j) - mx);
          for (int j = 0; j < L; ++j)
            pm(i, j) = j <= i ? std::exp(scores(i, j) - mx) / denom : 0.0;
        }
        om.block(r0, hh * dh, L, dh) = pm * vh;
        if (cache) probs.push_back(std::move(pmat));
      }
    }
  }
  att_concat = round_to(att_concat, p);

  Matrix sa_out = matmul(att_concat, b.v_o.value, p);
  Matrix y = add(sa_out, matmul(x, b.q_skip1.value, p), p);

  Matrix z2;
  std::vector<double> inv2;
  Matrix normed2 = round_to(rmsnorm_with_cache(y, b.q_n2.value, &z2, &inv2), p);

  Matrix h1 = matmul(normed2, b.u_w1.value, p);
  Matrix h3, act;
  if (b.swiglu) {
    h3 = matmul(normed2, b.u_w3->value, p);
    act = round_to(hadamard(apply_phi(PhiKind::Silu, h1, PrecisionMode::F64), h3), p);
  } else {
    act = apply_phi(PhiKind::ReluSquared, h1, p);
  }
  Matrix out = add(matmul(act, b.v_w2.value, p), matmul(y, b.q_skip2.value, p), p);

  if (cache) {
    cache->x = x;
    cache->z1 = std::move(z1);
    cache->normed1 = std::move(normed1);
    cache->inv_rms1 = std::move(inv1);
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->q_rot = std::move(q_rot);
    cache->k_rot = std::move(k_rot);
    cache->probs = std::move(probs);
    cache->att_concat = std::move(att_concat);
    cache->sa_out = std::move(sa_out);
    cache->y = std::move(y);
    cache->z2 = std::move(z2);
    cache->normed2 = std::move(normed2);
    cache->inv_rms2 = std::move(inv2);
    cache->h1 = std::move(h1);
    if (b.swiglu) cache->h3 = std::move(h3);
    cache->act = std::move(act);
    cache->out = out;
  }
  return out;
}

}  // namespace upm

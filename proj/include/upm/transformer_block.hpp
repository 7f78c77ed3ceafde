#pragma once

#include <optional>
#include <string>
#include <vector>

#include "upm/rng.hpp"
#include "upm/subfunction.hpp"

namespace upm {

// Pre-norm decoder block:
//   ATT(x) = SA(rmsnorm_acc(x, Q_n1)) + x * Q_1
//   MLP(y) = act(rmsnorm_acc(y, Q_n2) * U_w1) * V_w2 + y * Q_2
// with SA = causal multi-head softmax attention projected by V_o, and the
// gated variant act = silu(. U_w1) .* (. U_w3) when swiglu is set. The norm
// accumulators start orthogonal; the skip accumulators start at identity.
// Q_1 spans the incoming and internal boundary transforms, Q_2 the internal
// and outgoing ones, so every weight is morphed and the block is fully
// incompatible.
struct TransformerBlock {
  int model_dim = 0;
  int head_count = 1;
  int hidden_dim = 0;
  bool swiglu = false;
  bool rope = false;

  WeightSlot u_q, u_k, u_v, v_o;  // attention projections, D x D
  WeightSlot q_n1, q_n2;          // norm accumulators, D x D orthogonal at init
  WeightSlot u_w1;                // D x hidden
  std::optional<WeightSlot> u_w3; // D x hidden, swiglu gate
  WeightSlot v_w2;                // hidden x D
  WeightSlot q_skip1, q_skip2;    // skip accumulators, D x D identity at init
};

struct BlockOptions {
  int model_dim = 64;
  int head_count = 4;
  int hidden_dim = 256;
  bool swiglu = false;
  bool rope = false;
};

TransformerBlock make_transformer_block(const BlockOptions& opt, Rng& rng,
                                        const std::string& name_prefix);

// Forward intermediates kept for backpropagation.
struct BlockCache {
  Matrix x;
  Matrix z1, normed1;
  std::vector<double> inv_rms1;
  Matrix q, k, v;          // pre-rotation projections
  Matrix q_rot, k_rot;     // post-rotation (same as q,k without rope)
  std::vector<Matrix> probs;  // per (batch, head), each seq x seq
  Matrix att_concat;
  Matrix sa_out;
  Matrix y;
  Matrix z2, normed2;
  std::vector<double> inv_rms2;
  Matrix h1, h3, act;
  Matrix out;
};

Matrix eval_transformer_block(const TransformerBlock& b, const Matrix& x,
                              const ActShape& shape, PrecisionMode p,
                              BlockCache* cache = nullptr);

void apply_rope(Matrix& qk, const ActShape& shape, int head_count, bool backward);

}  // namespace upm

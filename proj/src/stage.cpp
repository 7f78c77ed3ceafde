#include "upm/stage.hpp"

#include <functional>

#include "upm/error.hpp"

namespace upm {

int component_in_dim(const Component& c) {
  if (const auto* g = std::get_if<Subfunction>(&c)) return g->in_dim;
  return std::get<TransformerBlock>(c).model_dim;
}

int component_out_dim(const Component& c) {
  if (const auto* g = std::get_if<Subfunction>(&c)) return g->out_dim;
  return std::get<TransformerBlock>(c).model_dim;
}

int component_internal_boundaries(const Component& c) {
  return std::holds_alternative<TransformerBlock>(c) ? 1 : 0;
}

namespace {

template <typename ComponentT, typename SlotT>
std::vector<SlotBinding> bindings_impl(ComponentT& c) {
  std::vector<SlotBinding> out;
  auto push = [&out](SlotT& s, SpaceRef l, SpaceRef r) {
    out.push_back({const_cast<WeightSlot*>(&s), l, r});
  };
  if (auto* g = std::get_if<Subfunction>(&c)) {
    if (g->norm_q) push(*g->norm_q, SpaceRef::In, SpaceRef::None);
    if (g->entry) push(*g->entry, SpaceRef::In, SpaceRef::None);
    if (g->exit) push(*g->exit, SpaceRef::None, SpaceRef::Out);
  } else {
    auto& b = std::get<TransformerBlock>(c);
    push(b.q_n1, SpaceRef::In, SpaceRef::None);
    push(b.u_q, SpaceRef::In, SpaceRef::None);
    push(b.u_k, SpaceRef::In, SpaceRef::None);
    push(b.u_v, SpaceRef::In, SpaceRef::None);
    push(b.v_o, SpaceRef::None, SpaceRef::Internal);
    push(b.q_skip1, SpaceRef::In, SpaceRef::Internal);
    push(b.q_n2, SpaceRef::Internal, SpaceRef::None);
    push(b.u_w1, SpaceRef::Internal, SpaceRef::None);
    if (b.u_w3) push(*b.u_w3, SpaceRef::Internal, SpaceRef::None);
    push(b.v_w2, SpaceRef::None, SpaceRef::Out);
    push(b.q_skip2, SpaceRef::Internal, SpaceRef::Out);
  }
  return out;
}

bool is_accumulator(const WeightSlot& s) { return s.role == SlotRole::Accumulator; }

const WeightSlot* exit_side_slot(const Component& c) {
  if (const auto* g = std::get_if<Subfunction>(&c))
    return g->exit ? &*g->exit : nullptr;
  return &std::get<TransformerBlock>(c).v_w2;
}

const WeightSlot* entry_side_slot(const Component& c) {
  if (const auto* g = std::get_if<Subfunction>(&c))
    return g->entry ? &*g->entry : nullptr;
  return &std::get<TransformerBlock>(c).u_q;  // blocks never present an accumulator entry
}

bool has_left_fold_target(const Component& c) {
  if (const auto* g = std::get_if<Subfunction>(&c))
    return g->entry.has_value() || g->norm_q.has_value();
  return true;
}

}  // namespace

std::vector<SlotBinding> slot_bindings(Component& c) {
  return bindings_impl<Component, WeightSlot>(c);
}

std::vector<SlotBinding> slot_bindings(const Component& c) {
  return bindings_impl<const Component, const WeightSlot>(c);
}

void check_boundary_slots(const Component& producer, const Component& consumer) {
  const WeightSlot* ex = exit_side_slot(producer);
  if (ex == nullptr)
    throw ContractViolation(
        "boundary producer has no exit slot; add an exit accumulator");
  if (!has_left_fold_target(consumer))
    throw ContractViolation(
        "boundary consumer has no entry or norm slot; add an entry accumulator");
  const WeightSlot* en = entry_side_slot(consumer);
  const bool exit_acc = is_accumulator(*ex);
  const bool entry_acc = en == nullptr || is_accumulator(*en);
  if (exit_acc && entry_acc)
    throw ContractViolation(
        "boundary has identity accumulators on both sides; an attacker could "
        "drop them, so construction is rejected");
}

Stage make_stage(std::vector<Component> components) {
  if (components.empty()) throw ContractViolation("stage: needs at least one component");
  for (std::size_t i = 0; i + 1 < components.size(); ++i) {
    if (component_out_dim(components[i]) != component_in_dim(components[i + 1]))
      throw ContractViolation("stage: component dimensions do not chain");
    check_boundary_slots(components[i], components[i + 1]);
  }
  Stage s;
  s.in_dim = component_in_dim(components.front());
  s.out_dim = component_out_dim(components.back());
  s.components = std::move(components);
  return s;
}

Incompatibility classify_incompatibility(const Stage& s) {
  // Union-find over morphed spaces inside the stage. Space ids:
  //   0 .. n: boundaries between/around components (0 = stage in,
  //   n = stage out), then one id per component-internal transform.
  const int n = static_cast<int>(s.components.size());
  int next_id = n + 1;
  std::vector<int> parent(n + 1);
  for (int i = 0; i <= n; ++i) parent[i] = i;
  std::vector<int> internal_id(n, -1);
  for (int i = 0; i < n; ++i)
    if (component_internal_boundaries(s.components[i]) > 0) {
      internal_id[i] = next_id++;
      parent.push_back(internal_id[i]);
    }
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](int a, int b) { parent[find(a)] = find(b); };

  for (int i = 0; i < n; ++i) {
    auto resolve = [&](SpaceRef ref) -> int {
      switch (ref) {
        case SpaceRef::In: return i;
        case SpaceRef::Out: return i + 1;
        case SpaceRef::Internal: return internal_id[i];
        case SpaceRef::None: return -1;
      }
      return -1;
    };
    for (const SlotBinding& sb : slot_bindings(s.components[i])) {
      const int a = resolve(sb.left);
      const int b = resolve(sb.right);
      if (a >= 0 && b >= 0) unite(a, b);
    }
  }
  return find(0) == find(n) ? Incompatibility::Full : Incompatibility::Partial;
}

Matrix eval_stage(const Stage& s, const Matrix& x, const ActShape& shape, PrecisionMode p) {
  Matrix h = x;
  for (const Component& c : s.components) {
    if (const auto* g = std::get_if<Subfunction>(&c))
      h = eval_subfunction(*g, h, p, shape);
    else
      h = eval_transformer_block(std::get<TransformerBlock>(c), h, shape, p);
  }
  return h;
}

}  // namespace upm

#pragma once

#include <variant>
#include <vector>

#include "upm/subfunction.hpp"
#include "upm/transformer_block.hpp"

namespace upm {

using Component = std::variant<Subfunction, TransformerBlock>;

int component_in_dim(const Component& c);
int component_out_dim(const Component& c);
// Number of morphed boundaries internal to the component (1 for a
// transformer block, 0 for a subfunction).
int component_internal_boundaries(const Component& c);

// Which morphed space each side of a slot touches during a morph step.
// Internal refers to the component's own boundary (the transformer block's
// mid transform); None means that side lives in an unmorphed space.
enum class SpaceRef : std::uint8_t { None, In, Internal, Out };

struct SlotBinding {
  WeightSlot* slot = nullptr;
  SpaceRef left = SpaceRef::None;   // folded with the inverse of that space's transform
  SpaceRef right = SpaceRef::None;  // folded with the forward of that space's transform
};

std::vector<SlotBinding> slot_bindings(Component& c);
std::vector<SlotBinding> slot_bindings(const Component& c);  // slots of a const view

enum class Incompatibility : std::uint8_t { Partial, Full };

// A consecutive run of components hosted by one protocol slot.
struct Stage {
  std::vector<Component> components;
  int in_dim = 0;
  int out_dim = 0;
};

// Validates dimension chaining and the rule that a boundary cannot have
// identity accumulators on both sides.
Stage make_stage(std::vector<Component> components);

// Full when a chain of two-sided slots connects the stage's incoming
// boundary to its outgoing one (directly or through internal transforms).
Incompatibility classify_incompatibility(const Stage& s);

Matrix eval_stage(const Stage& s, const Matrix& x, const ActShape& shape, PrecisionMode p);

// Both-accumulator check used across stage boundaries as well.
void check_boundary_slots(const Component& producer, const Component& consumer);

}  // namespace upm

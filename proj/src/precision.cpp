#include "upm/precision.hpp"

#include <cmath>
#include <limits>

#include "upm/error.hpp"

namespace upm {
namespace {

struct GridParams {
  int mantissa_bits;   // stored mantissa bits (excluding the implicit one)
  int min_normal_exp;  // ilogb of the smallest normal
  double max_finite;
};

GridParams grid_params(PrecisionMode p) {
  switch (p) {
    case PrecisionMode::F32:
      return {23, -126, 3.40282346638528859812e+38};
    case PrecisionMode::F16:
      return {10, -14, 65504.0};
    case PrecisionMode::BF16:
      // Largest finite bfloat16: 2^127 * (2 - 2^-7).
      return {7, -126, 3.38953138925153547591e+38};
    case PrecisionMode::F64:
    default:
      return {52, -1022, std::numeric_limits<double>::max()};
  }
}

}  // namespace

double unit_roundoff(PrecisionMode p) {
  return std::ldexp(1.0, -(grid_params(p).mantissa_bits + 1));
}

double round_scalar(double x, PrecisionMode p, RoundStats* stats, bool propagate_inf) {
  if (p == PrecisionMode::F64) return x;
  if (std::isnan(x)) return x;

  const GridParams g = grid_params(p);
  if (std::isinf(x)) {
    if (propagate_inf) return x;
    if (stats) stats->overflow_count++;
    return std::copysign(g.max_finite, x);
  }
  const double ax = std::fabs(x);
  if (ax == 0.0) return x;  // keeps signed zero

  int e = std::ilogb(ax);
  if (e < g.min_normal_exp) e = g.min_normal_exp;  // subnormal grid spacing
  const double quantum = std::ldexp(1.0, e - g.mantissa_bits);
  // x / quantum is an exact power-of-two scaling; rint applies the default
  // round-to-nearest-even mode.
  double r = std::rint(x / quantum) * quantum;
  if (std::fabs(r) > g.max_finite) {
    if (stats) stats->overflow_count++;
    r = propagate_inf ? std::copysign(std::numeric_limits<double>::infinity(), x)
                      : std::copysign(g.max_finite, x);
  }
  return r;
}

const char* to_string(PrecisionMode p) {
  switch (p) {
    case PrecisionMode::F64: return "f64";
    case PrecisionMode::F32: return "f32";
    case PrecisionMode::F16: return "f16";
    case PrecisionMode::BF16: return "bf16";
  }
  return "f64";
}

PrecisionMode precision_from_string(std::string_view name) {
  if (name == "f64" || name == "fp64" || name == "F64") return PrecisionMode::F64;
  if (name == "f32" || name == "fp32" || name == "F32") return PrecisionMode::F32;
  if (name == "f16" || name == "fp16" || name == "F16") return PrecisionMode::F16;
  if (name == "bf16" || name == "BF16") return PrecisionMode::BF16;
  throw ContractViolation("unknown precision: " + std::string(name));
}

}  // namespace upm

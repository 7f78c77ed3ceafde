#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace upm {

// Storage grids simulated on top of F64 values. A value "is at" a reduced
// precision when it is exactly representable in that format (round-trip
// through round_scalar is the identity).
enum class PrecisionMode : std::uint8_t { F64 = 0, F32 = 1, F16 = 2, BF16 = 3 };

// Half the machine epsilon of the format (the u in relative error bounds).
double unit_roundoff(PrecisionMode p);

struct RoundStats {
  std::int64_t overflow_count = 0;
};

// Round-to-nearest-even onto the grid of p. Values past the largest finite
// grid point clamp there and bump stats->overflow_count; with propagate_inf
// they become infinities instead. NaN passes through.
double round_scalar(double x, PrecisionMode p, RoundStats* stats = nullptr,
                    bool propagate_inf = false);

const char* to_string(PrecisionMode p);
PrecisionMode precision_from_string(std::string_view name);

}  // namespace upm

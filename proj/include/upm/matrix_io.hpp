#pragma once

#include <filesystem>
#include <string>

#include "upm/matrix.hpp"

namespace upm {

// Flat binary container: magic "UPMM", u32 rows, u32 cols, u8 precision tag,
// little-endian F64 payload.
void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

// Text form for fixtures: one row per line, comma-separated, %.17g.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path,
                       PrecisionMode p = PrecisionMode::F64);

std::string format_double(double x);  // shortest exact round-trip text

}  // namespace upm

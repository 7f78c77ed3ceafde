#include "upm/matrix_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "upm/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "matrix container assumes a little-endian host");

namespace upm {
namespace {

constexpr char kMagic[4] = {'U', 'P', 'M', 'M'};

void write_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_bytes(std::ifstream& in, void* p, std::size_t n) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!in) throw NumericalError("matrix container: truncated file");
}

}  // namespace

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericalError("cannot open for writing: " + path.string());
  write_bytes(out, kMagic, 4);
  const std::uint32_t rows = static_cast<std::uint32_t>(m.rows());
  const std::uint32_t cols = static_cast<std::uint32_t>(m.cols());
  const std::uint8_t tag = static_cast<std::uint8_t>(m.precision());
  write_bytes(out, &rows, 4);
  write_bytes(out, &cols, 4);
  write_bytes(out, &tag, 1);
  write_bytes(out, m.data().data(), m.data().size() * sizeof(double));
  if (!out) throw NumericalError("write failed: " + path.string());
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NumericalError("cannot open for reading: " + path.string());
  char magic[4];
  read_bytes(in, magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw NumericalError("bad magic in matrix container: " + path.string());
  std::uint32_t rows = 0, cols = 0;
  std::uint8_t tag = 0;
  read_bytes(in, &rows, 4);
  read_bytes(in, &cols, 4);
  read_bytes(in, &tag, 1);
  if (rows < 1 || cols < 1 || tag > 3)
    throw NumericalError("bad header in matrix container: " + path.string());
  std::vector<double> data(static_cast<std::size_t>(rows) * cols);
  read_bytes(in, data.data(), data.size() * sizeof(double));
  return Matrix::from_raw(static_cast<int>(rows), static_cast<int>(cols), std::move(data),
                          static_cast<PrecisionMode>(tag));
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw NumericalError("cannot open for writing: " + path.string());
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(const std::filesystem::path& path, PrecisionMode p) {
  std::ifstream in(path);
  if (!in) throw NumericalError("cannot open for reading: " + path.string());
  std::vector<double> data;
  int cols = -1, rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int this_cols = 0;
    while (std::getline(ss, cell, ',')) {
      data.push_back(std::stod(cell));
      ++this_cols;
    }
    if (cols < 0) cols = this_cols;
    if (this_cols != cols) throw NumericalError("ragged CSV: " + path.string());
    ++rows;
  }
  if (rows == 0) throw NumericalError("empty CSV: " + path.string());
  return Matrix::from_raw(rows, cols, std::move(data), p);
}

}  // namespace upm

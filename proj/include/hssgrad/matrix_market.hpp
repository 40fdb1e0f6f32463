#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "sparse.hpp"

namespace hssgrad {

namespace detail {

inline std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace detail

/// Reads a Matrix Market coordinate file (real, integer, complex or pattern;
/// general, symmetric, skew-symmetric or hermitian) into a complex matrix.
inline CsrMatrix<Complex> read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("matrix market: empty input");
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || detail::lowercase(object) != "matrix") {
    throw ParseError("matrix market: bad banner line");
  }
  if (detail::lowercase(format) != "coordinate") {
    throw ParseError("matrix market: only coordinate format is supported");
  }
  field = detail::lowercase(field);
  symmetry = detail::lowercase(symmetry);
  if (field != "real" && field != "integer" && field != "complex" && field != "pattern") {
    throw ParseError("matrix market: unsupported field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric" &&
      symmetry != "hermitian") {
    throw ParseError("matrix market: unsupported symmetry '" + symmetry + "'");
  }

  do {
    if (!std::getline(in, line)) throw ParseError("matrix market: missing size line");
  } while (line.empty() || line[0] == '%');

  std::size_t rows = 0, cols = 0, entries = 0;
  {
    std::istringstream sz(line);
    if (!(sz >> rows >> cols >> entries)) throw ParseError("matrix market: bad size line");
  }

  std::vector<Triplet<Complex>> trips;
  trips.reserve(symmetry == "general" ? entries : 2 * entries);
  for (std::size_t k = 0; k < entries; ++k) {
    if (!std::getline(in, line)) throw ParseError("matrix market: truncated entry list");
    if (line.empty() || line[0] == '%') {
      --k;
      continue;
    }
    std::istringstream es(line);
    std::size_t i = 0, j = 0;
    double re = 1.0, im = 0.0;
    if (!(es >> i >> j)) throw ParseError("matrix market: bad entry line");
    if (field != "pattern" && !(es >> re)) throw ParseError("matrix market: missing value");
    if (field == "complex" && !(es >> im)) throw ParseError("matrix market: missing imaginary part");
    if (i == 0 || j == 0 || i > rows || j > cols) throw ParseError("matrix market: index out of range");
    const Complex v{re, im};
    trips.push_back({i - 1, j - 1, v});
    if (i != j) {
      if (symmetry == "symmetric") trips.push_back({j - 1, i - 1, v});
      if (symmetry == "skew-symmetric") trips.push_back({j - 1, i - 1, -v});
      if (symmetry == "hermitian") trips.push_back({j - 1, i - 1, std::conj(v)});
    }
  }
  return CsrMatrix<Complex>::from_triplets(rows, cols, std::move(trips));
}

inline CsrMatrix<Complex> read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_matrix_market(in);
}

/// Writes "coordinate complex general" with round-trip precision.
inline void write_matrix_market(std::ostream& out, const CsrMatrix<Complex>& m) {
  out << "%%MatrixMarket matrix coordinate complex general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k) {
      const Complex v = m.values()[k];
      out << i + 1 << ' ' << m.col_idx()[k] + 1 << ' ' << v.real() << ' ' << v.imag() << '\n';
    }
  }
}

inline void write_matrix_market(const std::filesystem::path& path, const CsrMatrix<Complex>& m) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  write_matrix_market(out, m);
}

/// One complex value per line: "re im". A line with a single number is read
/// as a real value.
inline ComplexVector read_vector(std::istream& in) {
  std::vector<Complex> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '%' || line[0] == '#') continue;
    std::istringstream ls(line);
    double re = 0.0, im = 0.0;
    if (!(ls >> re)) throw ParseError("vector: bad line '" + line + "'");
    ls >> im;
    values.emplace_back(re, im);
  }
  return ComplexVector(std::move(values));
}

inline ComplexVector read_vector(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_vector(in);
}

inline void write_vector(std::ostream& out, const ComplexVector& v) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& e : v) out << e.real() << ' ' << e.imag() << '\n';
}

inline void write_vector(const std::filesystem::path& path, const ComplexVector& v) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  write_vector(out, v);
}

}  // namespace hssgrad

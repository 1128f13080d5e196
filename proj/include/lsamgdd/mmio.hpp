#ifndef LSAMGDD_MMIO_HPP
#define LSAMGDD_MMIO_HPP

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lsamgdd/errors.hpp"
#include "lsamgdd/sparse.hpp"

namespace lsamgdd {

namespace detail {

inline std::string mm_lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

/// First line that is neither blank nor a % comment. Returns false at EOF.
inline bool mm_next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    std::size_t p = line.find_first_not_of(" \t\r\n");
    if (p == std::string::npos) continue;
    if (line[p] == '%') continue;
    return true;
  }
  return false;
}

struct MmHeader {
  std::string object, format, field, symmetry;
};

inline MmHeader mm_read_header(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path + ": empty file");
  std::istringstream ss(line);
  std::string banner;
  MmHeader h;
  ss >> banner >> h.object >> h.format >> h.field >> h.symmetry;
  if (mm_lower(banner) != "%%matrixmarket")
    throw FormatError(path + ": missing MatrixMarket banner");
  h.object = mm_lower(h.object);
  h.format = mm_lower(h.format);
  h.field = mm_lower(h.field);
  h.symmetry = mm_lower(h.symmetry);
  if (h.object != "matrix") throw FormatError(path + ": unsupported object '" + h.object + "'");
  if (h.field != "real")
    throw FormatError(path + ": unsupported field '" + h.field + "' (only real is supported)");
  return h;
}

} // namespace detail

/** \brief Read a real coordinate Matrix Market file into CSR.
 *
 * Supports general and symmetric files (symmetric entries are mirrored).
 * Indices are 1-based on disk and 0-based in memory. Malformed content
 * raises FormatError.
 */
inline SparseMatrix mm_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open file");
  const detail::MmHeader h = detail::mm_read_header(in, path);
  if (h.format != "coordinate")
    throw FormatError(path + ": expected coordinate format, got '" + h.format + "'");
  const bool symmetric = h.symmetry == "symmetric";
  if (!symmetric && h.symmetry != "general")
    throw FormatError(path + ": unsupported symmetry '" + h.symmetry + "'");

  std::string line;
  if (!detail::mm_next_data_line(in, line)) throw FormatError(path + ": missing size line");
  std::istringstream ss(line);
  long long rows = -1, cols = -1, entries = -1;
  if (!(ss >> rows >> cols >> entries) || rows < 0 || cols < 0 || entries < 0)
    throw FormatError(path + ": malformed size line '" + line + "'");

  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(symmetric ? 2 * entries : entries));
  for (long long k = 0; k < entries; ++k) {
    if (!detail::mm_next_data_line(in, line))
      throw FormatError(path + ": expected " + std::to_string(entries) + " entries, got " +
                        std::to_string(k));
    std::istringstream es(line);
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(es >> i >> j >> v)) throw FormatError(path + ": malformed entry '" + line + "'");
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw FormatError(path + ": entry index (" + std::to_string(i) + ", " + std::to_string(j) +
                        ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    trips.push_back({static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1), v});
    if (symmetric && i != j)
      trips.push_back({static_cast<std::size_t>(j - 1), static_cast<std::size_t>(i - 1), v});
  }
  return csr_from_triplets(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols),
                           std::move(trips));
}

/** \brief Write CSR as a real general coordinate Matrix Market file.
 *
 * Values are written with 17 significant digits, so a read-back reproduces
 * them exactly.
 */
inline void mm_write(const std::string& path, const SparseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw FormatError(path + ": cannot open file for writing");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.n_rows() << " " << m.n_cols() << " " << m.nnz() << "\n";
  char buf[64];
  for (std::size_t i = 0; i < m.n_rows(); ++i)
    for (std::size_t k = m.row_begin(i); k < m.row_end(i); ++k) {
      std::snprintf(buf, sizeof(buf), "%zu %zu %.17g\n", i + 1, m.col_index(k) + 1, m.value(k));
      out << buf;
    }
  if (!out) throw FormatError(path + ": write failed");
}

/// Read a dense vector stored as an n-by-1 real array Matrix Market file.
inline Vector mm_read_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open file");
  const detail::MmHeader h = detail::mm_read_header(in, path);
  if (h.format != "array")
    throw FormatError(path + ": expected array format for a vector, got '" + h.format + "'");
  if (h.symmetry != "general")
    throw FormatError(path + ": unsupported symmetry '" + h.symmetry + "' for a vector");
  std::string line;
  if (!detail::mm_next_data_line(in, line)) throw FormatError(path + ": missing size line");
  std::istringstream ss(line);
  long long rows = -1, cols = -1;
  if (!(ss >> rows >> cols) || rows < 0 || cols != 1)
    throw FormatError(path + ": a vector must have one column");
  Vector v(static_cast<std::size_t>(rows));
  for (long long i = 0; i < rows; ++i) {
    if (!detail::mm_next_data_line(in, line))
      throw FormatError(path + ": expected " + std::to_string(rows) + " values, got " +
                        std::to_string(i));
    std::istringstream es(line);
    if (!(es >> v[static_cast<std::size_t>(i)]))
      throw FormatError(path + ": malformed value '" + line + "'");
  }
  return v;
}

inline void mm_write_vector(const std::string& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) throw FormatError(path + ": cannot open file for writing");
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n";
  char buf[64];
  for (double x : v) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", x);
    out << buf;
  }
  if (!out) throw FormatError(path + ": write failed");
}

} // namespace lsamgdd

#endif // LSAMGDD_MMIO_HPP

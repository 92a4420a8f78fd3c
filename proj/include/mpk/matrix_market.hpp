#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpk/crs.hpp"

namespace mpk {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, long line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Reads a Matrix Market coordinate file (real, integer or pattern;
/// general or symmetric). 1-based indices become 0-based, symmetric
/// storage is expanded to the full pattern, duplicates are summed,
/// rows are sorted to canonical form, pattern entries get value 1.0.
inline CrsMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
  ++lineno;
  std::istringstream hdr(line);
  std::string banner, object, format, field, symmetry;
  hdr >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || object != "matrix")
    throw ParseError(path, lineno, "malformed MatrixMarket banner");
  if (format != "coordinate")
    throw ParseError(path, lineno, "only coordinate format is supported");
  const bool pattern = field == "pattern";
  if (field != "real" && field != "integer" && !pattern)
    throw ParseError(path, lineno, "unsupported field '" + field + "'");
  const bool symmetric = symmetry == "symmetric";
  if (symmetry != "general" && !symmetric)
    throw ParseError(path, lineno, "unsupported symmetry '" + symmetry + "'");

  long nr = -1, nc = -1, nz = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream sz(line);
    if (!(sz >> nr >> nc >> nz))
      throw ParseError(path, lineno, "malformed size line");
    break;
  }
  if (nr < 0) throw ParseError(path, lineno, "missing size line");

  std::vector<index_t> rows, cols;
  std::vector<double> vals;
  rows.reserve(nz);
  cols.reserve(nz);
  vals.reserve(nz);
  long seen = 0;
  while (seen < nz) {
    if (!std::getline(in, line))
      throw ParseError(path, lineno, "unexpected end of file");
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream es(line);
    long r, c;
    double v = 1.0;
    if (!(es >> r >> c)) throw ParseError(path, lineno, "malformed entry");
    if (!pattern && !(es >> v))
      throw ParseError(path, lineno, "missing value");
    if (r < 1 || r > nr || c < 1 || c > nc)
      throw ParseError(path, lineno, "index out of range");
    rows.push_back(static_cast<index_t>(r - 1));
    cols.push_back(static_cast<index_t>(c - 1));
    vals.push_back(v);
    if (symmetric && r != c) {
      rows.push_back(static_cast<index_t>(c - 1));
      cols.push_back(static_cast<index_t>(r - 1));
      vals.push_back(v);
    }
    ++seen;
  }
  return crs_from_triplets(static_cast<index_t>(nr), static_cast<index_t>(nc),
                           std::move(rows), std::move(cols), std::move(vals));
}

/// Writes coordinate real general, 1-based, with round-trip-exact values.
inline void write_matrix_market(const CrsMatrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.n_rows << " " << a.n_cols << " " << a.nnz() << "\n";
  char buf[64];
  for (index_t i = 0; i < a.n_rows; ++i)
    for (index_t j = a.row_ptr[i]; j < a.row_ptr[i + 1]; ++j) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i + 1, a.col_idx[j] + 1,
                    a.values[j]);
      out << buf;
    }
}

/// Plain-text vector file: one decimal per line.
inline void write_vector_file(const std::vector<double>& v,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  char buf[48];
  for (double x : v) {
    std::snprintf(buf, sizeof buf, "%.17g\n", x);
    out << buf;
  }
}

inline std::vector<double> read_vector_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> v;
  double x;
  while (in >> x) v.push_back(x);
  return v;
}

}  // namespace mpk

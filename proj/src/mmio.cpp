#include "gnp/mmio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gnp {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

CsrMatrix parse_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw MmioError("empty stream");

  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix")
    throw MmioError("not a Matrix Market matrix file");
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (format != "coordinate")
    throw MmioError("unsupported format: " + format + " (coordinate only)");
  if (field != "real")
    throw MmioError("unsupported field: " + field + " (real only)");
  const bool symmetric = symmetry == "symmetric";
  const bool skew = symmetry == "skew-symmetric";
  if (!symmetric && !skew && symmetry != "general")
    throw MmioError("unsupported symmetry: " + symmetry);

  // skip comments and blank lines
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream size_line(line);
  long long nrows = -1, ncols = -1, nnz = -1;
  size_line >> nrows >> ncols >> nnz;
  if (nrows < 0 || ncols < 0 || nnz < 0) throw MmioError("bad size line");
  if (nrows != ncols) throw MmioError("matrix is not square");
  const std::size_t n = static_cast<std::size_t>(nrows);

  std::vector<std::size_t> rows, cols;
  std::vector<double> vals;
  rows.reserve(nnz);
  cols.reserve(nnz);
  vals.reserve(nnz);

  long long seen = 0;
  while (seen < nnz) {
    if (!std::getline(in, line)) throw MmioError("truncated entry list");
    if (line.empty() || line[0] == '%') continue;
    std::istringstream entry(line);
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(entry >> i >> j >> v)) throw MmioError("malformed entry: " + line);
    if (i < 1 || j < 1 || i > nrows || j > ncols)
      throw MmioError("entry index out of range: " + line);
    const auto r = static_cast<std::size_t>(i - 1);
    const auto c = static_cast<std::size_t>(j - 1);
    rows.push_back(r);
    cols.push_back(c);
    vals.push_back(v);
    if ((symmetric || skew) && r != c) {
      rows.push_back(c);
      cols.push_back(r);
      vals.push_back(skew ? -v : v);
    }
    ++seen;
  }
  CsrMatrix a = csr_from_triplets(n, std::move(rows), std::move(cols),
                                  std::move(vals));
  for (double v : a.values) {
    if (!std::isfinite(v)) throw MmioError("non-finite value in matrix");
  }
  return a;
}

CsrMatrix read_matrix_market_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw MmioError("cannot open " + path);
  return parse_matrix_market(f);
}

void write_matrix_market(std::ostream& out, const CsrMatrix& a) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.n << ' ' << a.n << ' ' << a.nnz() << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < a.n; ++i) {
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      out << i + 1 << ' ' << a.col_idx[k] + 1 << ' ' << a.values[k] << '\n';
  }
}

void write_matrix_market_file(const std::string& path, const CsrMatrix& a) {
  std::ofstream f(path);
  if (!f) throw MmioError("cannot open " + path + " for writing");
  write_matrix_market(f, a);
}

}  // namespace gnp

#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "gnp/csr.hpp"

namespace gnp {

struct MmioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reads a Matrix Market file: coordinate format, real field, square,
// general/symmetric/skew-symmetric symmetry. Symmetric and skew entries are
// expanded to both triangles (skew with the negated mirror); duplicates are
// summed. Indices are 1-based in the file, 0-based in memory.
CsrMatrix parse_matrix_market(std::istream& in);
CsrMatrix read_matrix_market_file(const std::string& path);

// Writes coordinate/real/general with full precision.
void write_matrix_market(std::ostream& out, const CsrMatrix& a);
void write_matrix_market_file(const std::string& path, const CsrMatrix& a);

}  // namespace gnp

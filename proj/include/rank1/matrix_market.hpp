#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>

#include "rank1/matrix.hpp"

namespace rank1 {

/// What a Matrix Market file decodes to: coordinate files give a
/// SparseMatrix, array files a DenseMatrix.
using MarketMatrix = std::variant<DenseMatrix, SparseMatrix>;

/// Reads a real (or integer), general Matrix Market file. 1-based indices
/// become 0-based. Throws ParseError carrying the offending line number.
MarketMatrix mm_read(const std::filesystem::path& path);
MarketMatrix mm_parse(std::istream& in);

/// Dense matrices are written in array format, banded and sparse ones in
/// coordinate format. Values use the shortest round-trip decimal form.
void mm_write(const Matrix& m, const std::filesystem::path& path);
void mm_write(const Matrix& m, std::ostream& out);

/// Vectors are n x 1 array files; coordinate n x 1 files are also accepted.
Vector read_vector(const std::filesystem::path& path);
void write_vector(std::span<const double> v, const std::filesystem::path& path);

Matrix to_matrix(MarketMatrix m);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace rank1

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "oscar/grid.hpp"

namespace oscar {

/// CSV dialect: comma-separated, '.' decimal, header row, LF endings,
/// 17 significant digits.
void write_field_csv(const std::string& path, const Grid& grid, const ComplexField& f);
ComplexField read_field_csv(const std::string& path);

/// Binary block: little-endian u64 length prefix, then 64-bit floats
/// (re, im interleaved for complex data).
void write_field_block(std::ostream& os, const ComplexField& f);
ComplexField read_field_block(std::istream& is);
void write_matrix_block(std::ostream& os, const Eigen::MatrixXcd& m);
Eigen::MatrixXcd read_matrix_block(std::istream& is);
void write_matrix_block_file(const std::string& path, const Eigen::MatrixXcd& m);

/// FNV-1a checksum of a file, for run manifests.
std::uint64_t file_checksum(const std::string& path);

std::string format_full(double v);  // 17 significant digits

}  // namespace oscar

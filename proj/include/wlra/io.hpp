#pragma once

// Matrix files. CSV: one row per line, comma separated, '.' decimal point
// regardless of locale. Binary: "WLRA1", u64 rows, u64 cols, then row-major
// little-endian f64.

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "wlra/matcore.hpp"

namespace wlra::io {

inline constexpr std::string_view kBinaryMagic = "WLRA1";

Matrix<double> read_csv(std::istream& in);
void write_csv(std::ostream& out, const Matrix<double>& a);

Matrix<double> read_binary(std::istream& in);
void write_binary(std::ostream& out, const Matrix<double>& a);

/// Sniffs the magic; anything else is parsed as CSV.
Matrix<double> read_matrix(const std::filesystem::path& path);

/// ".csv" extension selects CSV, everything else the binary format.
void write_matrix(const std::filesystem::path& path, const Matrix<double>& a);

}  // namespace wlra::io

#include "wlra/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace wlra::io {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_field(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError("cannot parse '" + std::string(field) + "' as a number", line);
  }
  if (!std::isfinite(value)) throw ParseError("non-finite entry", line);
  return value;
}

template <typename T>
T to_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::array<unsigned char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &v, sizeof(T));
    std::reverse(bytes.begin(), bytes.end());
    std::memcpy(&v, bytes.data(), sizeof(T));
  }
  return v;
}

template <typename T>
void put(std::ostream& out, T v) {
  v = to_little_endian(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ParseError("truncated binary matrix", 0);
  return to_little_endian(v);
}

}  // namespace

Matrix<double> read_csv(std::istream& in) {
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    Index count = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = row.find(',', start);
      const auto field = row.substr(start, comma == std::string_view::npos ? row.npos : comma - start);
      values.push_back(parse_field(field, line_no));
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cols >= 0 && count != cols) {
      throw ParseError("expected " + std::to_string(cols) + " fields, found " + std::to_string(count),
                       line_no);
    }
    cols = count;
    ++rows;
  }
  if (rows == 0) throw ParseError("empty matrix file", 0);
  Matrix<double> a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  return a;
}

void write_csv(std::ostream& out, const Matrix<double>& a) {
  std::array<char, 32> buf;
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j) out.put(',');
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), a(i, j));
      out.write(buf.data(), res.ptr - buf.data());
    }
    out.put('\n');
  }
}

Matrix<double> read_binary(std::istream& in) {
  std::array<char, kBinaryMagic.size()> magic{};
  if (!in.read(magic.data(), magic.size()) ||
      std::string_view(magic.data(), magic.size()) != kBinaryMagic) {
    throw ParseError("missing WLRA1 magic", 0);
  }
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  if (rows == 0 || cols == 0) throw ParseError("binary matrix has a zero dimension", 0);
  Matrix<double> a(static_cast<Index>(rows), static_cast<Index>(cols));
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      a(i, j) = get<double>(in);
      if (!std::isfinite(a(i, j))) throw ParseError("non-finite entry in binary matrix", 0);
    }
  }
  return a;
}

void write_binary(std::ostream& out, const Matrix<double>& a) {
  out.write(kBinaryMagic.data(), kBinaryMagic.size());
  put<std::uint64_t>(out, static_cast<std::uint64_t>(a.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(a.cols()));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) put<double>(out, a(i, j));
}

Matrix<double> read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::array<char, kBinaryMagic.size()> head{};
  in.read(head.data(), head.size());
  const bool binary = in.gcount() == static_cast<std::streamsize>(head.size()) &&
                      std::string_view(head.data(), head.size()) == kBinaryMagic;
  in.clear();
  in.seekg(0);
  return binary ? read_binary(in) : read_csv(in);
}

void write_matrix(const std::filesystem::path& path, const Matrix<double>& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  if (path.extension() == ".csv") {
    write_csv(out, a);
  } else {
    write_binary(out, a);
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace wlra::io

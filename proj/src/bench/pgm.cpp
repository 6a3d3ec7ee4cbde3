#include "wlra/bench/pgm.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <vector>

namespace wlra::bench {
namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in, const std::filesystem::path& path) {
  std::string token;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  if (token.empty()) throw ParseError("truncated PGM header in " + path.string(), 0);
  return token;
}

Index header_number(std::istream& in, const std::filesystem::path& path) {
  const std::string token = header_token(in, path);
  if (token.empty() || !std::all_of(token.begin(), token.end(), [](char c) { return std::isdigit(c); })) {
    throw ParseError("bad PGM header field '" + token + "' in " + path.string(), 0);
  }
  return std::stol(token);
}

}  // namespace

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  if (header_token(in, path) != "P5") throw ParseError("not a binary PGM (P5): " + path.string(), 0);
  Image img;
  img.dims.width = header_number(in, path);
  img.dims.height = header_number(in, path);
  const Index maxval = header_number(in, path);
  if (img.dims.width < 1 || img.dims.height < 1 || maxval < 1 || maxval > 255) {
    throw ParseError("unsupported PGM geometry or maxval in " + path.string(), 0);
  }
  std::vector<unsigned char> raw(static_cast<std::size_t>(img.dims.pixels()));
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw ParseError("truncated PGM pixel data in " + path.string(), 0);
  }
  img.pixels.resize(img.dims.pixels());
  for (Index p = 0; p < img.dims.pixels(); ++p) img.pixels(p) = raw[static_cast<std::size_t>(p)];
  return img;
}

void write_pgm(const std::filesystem::path& path, const Eigen::Ref<const Vector<double>>& pixels,
               const FrameDims& dims) {
  if (pixels.size() != dims.pixels()) throw DimensionError("write_pgm: pixel count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "P5\n" << dims.width << ' ' << dims.height << "\n255\n";
  std::vector<unsigned char> raw(static_cast<std::size_t>(pixels.size()));
  for (Index p = 0; p < pixels.size(); ++p) {
    raw[static_cast<std::size_t>(p)] =
        static_cast<unsigned char>(std::clamp(std::lround(pixels(p)), 0L, 255L));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw Error("write failed: " + path.string());
}

FrameStack read_frame_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("not a directory: " + dir.string());
  FrameStack stack;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") stack.files.push_back(entry.path());
  }
  if (stack.files.empty()) throw Error("no .pgm files in " + dir.string());
  std::sort(stack.files.begin(), stack.files.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
  for (std::size_t t = 0; t < stack.files.size(); ++t) {
    Image img = read_pgm(stack.files[t]);
    if (t == 0) {
      stack.dims = img.dims;
      stack.frames.resize(img.dims.pixels(), static_cast<Index>(stack.files.size()));
    } else if (img.dims.height != stack.dims.height || img.dims.width != stack.dims.width) {
      throw DimensionError("frame " + stack.files[t].string() + " has different dimensions");
    }
    stack.frames.col(static_cast<Index>(t)) = img.pixels;
  }
  return stack;
}

void write_frame_directory(const std::filesystem::path& dir, const Matrix<double>& frames,
                           const FrameDims& dims, const std::string& prefix) {
  std::filesystem::create_directories(dir);
  const int digits = std::max<int>(4, static_cast<int>(std::to_string(frames.cols()).size()));
  for (Index t = 0; t < frames.cols(); ++t) {
    write_pgm(dir / fmt::format("{}{:0{}}.pgm", prefix, t, digits), frames.col(t), dims);
  }
}

}  // namespace wlra::bench

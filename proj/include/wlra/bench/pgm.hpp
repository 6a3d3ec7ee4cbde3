#pragma once

#include <filesystem>
#include <string>

#include "wlra/bench/scene.hpp"

namespace wlra::bench {

/// Binary 8-bit PGM (P5). Pixels come back as doubles in [0, maxval].
struct Image {
  FrameDims dims;
  Vector<double> pixels;  ///< row-major, y * width + x
};

Image read_pgm(const std::filesystem::path& path);

/// Values are rounded and clamped to [0, 255].
void write_pgm(const std::filesystem::path& path, const Eigen::Ref<const Vector<double>>& pixels,
               const FrameDims& dims);

struct FrameStack {
  Matrix<double> frames;  ///< one column per file
  FrameDims dims;
  std::vector<std::filesystem::path> files;
};

/// Every *.pgm in `dir`, lexicographic file-name order = frame order.
FrameStack read_frame_directory(const std::filesystem::path& dir);

/// Writes column t as `<prefix><t, zero padded>.pgm`.
void write_frame_directory(const std::filesystem::path& dir, const Matrix<double>& frames,
                           const FrameDims& dims, const std::string& prefix = "frame_");

}  // namespace wlra::bench

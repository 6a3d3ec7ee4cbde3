#pragma once

// Synthetic surveillance-style video: a low-rank background (static texture
// plus illumination components switching on partway through), moving
// rectangles, an optional parked object, and sensor noise. Frames are matrix
// columns; pixel (y, x) sits at row y * width + x.

#include <cstdint>
#include <optional>
#include <vector>

#include "wlra/matcore.hpp"

namespace wlra::bench {

struct FrameDims {
  Index height = 0;
  Index width = 0;
  Index pixels() const { return height * width; }
};

/// Half-open frame range [begin, end).
struct FrameWindow {
  Index begin = 0;
  Index end = 0;
  bool contains(Index t) const { return t >= begin && t < end; }
};

struct SyntheticSceneConfig {
  Index height = 64;
  Index width = 64;
  Index num_frames = 120;
  /// Static texture plus (bg_rank - 1) illumination components.
  Index bg_rank = 2;
  Index fg_objects = 3;
  Index fg_size = 10;
  double fg_magnitude = 70.0;
  double noise_sigma = 1.0;
  std::optional<FrameWindow> static_fg_window;
  Index static_fg_size = 24;
  std::vector<Index> pure_bg_frames;
  /// Peak intensity change of each illumination component.
  double illumination_amplitude = 70.0;
  /// First frame affected by illumination change; negative means num_frames / 3.
  Index illumination_onset = -1;
  std::uint64_t seed = 0;

  FrameDims dims() const { return {height, width}; }
  Index resolved_onset() const { return illumination_onset < 0 ? num_frames / 3 : illumination_onset; }

  /// Throws ConfigError on bad geometry or frame indices.
  void validate() const;

  /// Defaults laid out like a surveillance clip: a block of pure-background
  /// frames early on (10% of the clip), lighting change from n/3, and a
  /// parked object over the last 10% of frames.
  static SyntheticSceneConfig video_like(Index num_frames, std::uint64_t seed = 0);
};

struct Scene {
  Matrix<double> frames;      ///< background + foreground + noise
  Matrix<double> background;  ///< noise-free ground truth, rank <= bg_rank
  Matrix<double> masks;       ///< 1 where a foreground object covers the pixel
  FrameDims dims;
};

Scene generate_scene(const SyntheticSceneConfig& cfg);

}  // namespace wlra::bench

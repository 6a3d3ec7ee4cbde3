#include "wlra/bench/scene.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace wlra::bench {
namespace {

struct Mover {
  double y, x, vy, vx, sign;
};

// Smooth pattern in [-1, 1]: a few random low-frequency plane waves.
Vector<double> smooth_field(const FrameDims& dims, std::mt19937_64& rng, int waves) {
  std::uniform_real_distribution<double> freq(0.5, 3.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  Vector<double> field = Vector<double>::Zero(dims.pixels());
  for (int w = 0; w < waves; ++w) {
    const double fy = freq(rng) / static_cast<double>(dims.height);
    const double fx = freq(rng) / static_cast<double>(dims.width);
    const double ph = phase(rng);
    for (Index y = 0; y < dims.height; ++y)
      for (Index x = 0; x < dims.width; ++x)
        field(y * dims.width + x) +=
            std::sin(2.0 * std::numbers::pi * (fy * y + fx * x) + ph);
  }
  const double peak = field.cwiseAbs().maxCoeff();
  if (peak > 0.0) field /= peak;
  return field;
}

void paint(Matrix<double>& frames, Matrix<double>& masks, const FrameDims& dims, Index t,
           Index top, Index left, Index size, double value) {
  for (Index y = top; y < top + size; ++y) {
    for (Index x = left; x < left + size; ++x) {
      const Index p = y * dims.width + x;
      frames(p, t) += value;
      masks(p, t) = 1.0;
    }
  }
}

// Temporal profile of illumination component j (1-based) from the onset on.
double illumination_profile(Index j, Index t, Index onset, Index n) {
  if (t < onset) return 0.0;
  if (j == 1) {
    const double ramp = std::max<double>(1.0, static_cast<double>(n) / 20.0);
    const double s = std::min(1.0, static_cast<double>(t - onset + 1) / ramp);
    return s * s * (3.0 - 2.0 * s);
  }
  const double span = static_cast<double>(std::max<Index>(1, n - onset));
  return std::sin(std::numbers::pi * static_cast<double>(j - 1) * (t - onset) / span);
}

}  // namespace

void SyntheticSceneConfig::validate() const {
  if (height < 1 || width < 1 || num_frames < 1) throw ConfigError("scene: empty geometry");
  if (bg_rank < 1) throw ConfigError("scene: bg_rank must be >= 1");
  if (fg_objects < 0) throw ConfigError("scene: fg_objects must be >= 0");
  if (fg_objects > 0 && (fg_size < 1 || fg_size > height || fg_size > width)) {
    throw ConfigError("scene: fg_size " + std::to_string(fg_size) + " does not fit the frame");
  }
  if (noise_sigma < 0.0) throw ConfigError("scene: noise_sigma must be >= 0");
  if (static_fg_window) {
    const auto& w = *static_fg_window;
    if (w.begin < 0 || w.end > num_frames || w.begin >= w.end) {
      throw ConfigError("scene: static_fg_window outside [0, num_frames)");
    }
    if (static_fg_size < 1 || static_fg_size > height || static_fg_size > width) {
      throw ConfigError("scene: static_fg_size does not fit the frame");
    }
  }
  for (const Index t : pure_bg_frames) {
    if (t < 0 || t >= num_frames) throw ConfigError("scene: pure_bg_frames index out of range");
  }
}

SyntheticSceneConfig SyntheticSceneConfig::video_like(Index num_frames, std::uint64_t seed) {
  SyntheticSceneConfig cfg;
  cfg.num_frames = num_frames;
  cfg.seed = seed;
  const Index first = std::max<Index>(1, num_frames / 40);
  const Index count = std::max<Index>(2, num_frames / 10);
  for (Index t = first; t < std::min(num_frames, first + count); ++t) cfg.pure_bg_frames.push_back(t);
  const Index parked = std::max<Index>(1, num_frames / 10);
  cfg.static_fg_window = FrameWindow{num_frames - parked, num_frames};
  return cfg;
}

Scene generate_scene(const SyntheticSceneConfig& cfg) {
  cfg.validate();
  const FrameDims dims = cfg.dims();
  const Index m = dims.pixels();
  const Index n = cfg.num_frames;
  std::mt19937_64 rng(cfg.seed);

  Scene scene;
  scene.dims = dims;

  // Background: shaded texture plus illumination components.
  Vector<double> texture = Vector<double>::Constant(m, 110.0) + 45.0 * smooth_field(dims, rng, 4);
  // Sharp-edged structures (walls, windows, road markings) on top of the shading.
  {
    std::uniform_int_distribution<Index> ry(0, dims.height - 1);
    std::uniform_int_distribution<Index> rx(0, dims.width - 1);
    std::uniform_real_distribution<double> shade(-30.0, 30.0);
    const Index blocks = std::max<Index>(4, dims.pixels() / 256);
    for (Index b = 0; b < blocks; ++b) {
      const Index y0 = ry(rng), x0 = rx(rng);
      const Index y1 = std::min(dims.height, y0 + 2 + ry(rng) / 3);
      const Index x1 = std::min(dims.width, x0 + 2 + rx(rng) / 3);
      const double delta = shade(rng);
      for (Index y = y0; y < y1; ++y)
        for (Index x = x0; x < x1; ++x) texture(y * dims.width + x) += delta;
    }
  }
  std::vector<Vector<double>> lights;
  for (Index j = 1; j < cfg.bg_rank; ++j) lights.push_back(smooth_field(dims, rng, 2));
  const Index onset = cfg.resolved_onset();
  scene.background.resize(m, n);
  for (Index t = 0; t < n; ++t) {
    scene.background.col(t) = texture;
    for (Index j = 1; j < cfg.bg_rank; ++j) {
      scene.background.col(t) += cfg.illumination_amplitude *
                                 illumination_profile(j, t, onset, n) *
                                 lights[static_cast<std::size_t>(j - 1)];
    }
  }

  scene.frames = scene.background;
  scene.masks = Matrix<double>::Zero(m, n);
  std::vector<bool> pure(static_cast<std::size_t>(n), false);
  for (const Index t : cfg.pure_bg_frames) pure[static_cast<std::size_t>(t)] = true;

  std::vector<Mover> movers;
  if (cfg.fg_objects > 0) {
    std::uniform_real_distribution<double> py(0.0, static_cast<double>(dims.height - cfg.fg_size));
    std::uniform_real_distribution<double> px(0.0, static_cast<double>(dims.width - cfg.fg_size));
    std::uniform_real_distribution<double> speed(0.7, 2.0);
    std::bernoulli_distribution flip(0.5);
    for (Index o = 0; o < cfg.fg_objects; ++o) {
      Mover mv{py(rng), px(rng), speed(rng), speed(rng), (o % 2 == 0) ? 1.0 : -1.0};
      if (flip(rng)) mv.vy = -mv.vy;
      if (flip(rng)) mv.vx = -mv.vx;
      movers.push_back(mv);
    }
  }
  Index static_top = 0;
  Index static_left = 0;
  if (cfg.static_fg_window) {
    std::uniform_int_distribution<Index> sy(0, dims.height - cfg.static_fg_size);
    std::uniform_int_distribution<Index> sx(0, dims.width - cfg.static_fg_size);
    static_top = sy(rng);
    static_left = sx(rng);
  }

  const double max_y = static_cast<double>(dims.height - cfg.fg_size);
  const double max_x = static_cast<double>(dims.width - cfg.fg_size);
  for (Index t = 0; t < n; ++t) {
    const bool clean = pure[static_cast<std::size_t>(t)];
    for (auto& mv : movers) {
      if (!clean) {
        paint(scene.frames, scene.masks, dims, t, static_cast<Index>(std::lround(mv.y)),
              static_cast<Index>(std::lround(mv.x)), cfg.fg_size, mv.sign * cfg.fg_magnitude);
      }
      mv.y += mv.vy;
      mv.x += mv.vx;
      if (mv.y < 0.0 || mv.y > max_y) {
        mv.vy = -mv.vy;
        mv.y = std::clamp(mv.y, 0.0, max_y);
      }
      if (mv.x < 0.0 || mv.x > max_x) {
        mv.vx = -mv.vx;
        mv.x = std::clamp(mv.x, 0.0, max_x);
      }
    }
    if (!clean && cfg.static_fg_window && cfg.static_fg_window->contains(t)) {
      // The parked object replaces whatever moved through its footprint.
      for (Index y = static_top; y < static_top + cfg.static_fg_size; ++y) {
        for (Index x = static_left; x < static_left + cfg.static_fg_size; ++x) {
          const Index p = y * dims.width + x;
          scene.frames(p, t) = scene.background(p, t) + cfg.fg_magnitude;
          scene.masks(p, t) = 1.0;
        }
      }
    }
  }

  if (cfg.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
    for (Index t = 0; t < n; ++t)
      for (Index p = 0; p < m; ++p) scene.frames(p, t) += noise(rng);
  }
  return scene;
}

}  // namespace wlra::bench

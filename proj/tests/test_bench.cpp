#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "wlra/bench/experiment.hpp"
#include "wlra/bench/pgm.hpp"

using namespace wlra;
using namespace wlra::bench;
using M = Matrix<double>;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "wlra_test_bench" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Window-by-window SSIM straight from the definition, no integral images.
double ssim_by_loops(const Vector<double>& a, const Vector<double>& b, const FrameDims& d, Index w) {
  const double c1 = std::pow(0.01 * 255.0, 2);
  const double c2 = std::pow(0.03 * 255.0, 2);
  double total = 0.0;
  int windows = 0;
  for (Index y = 0; y + w <= d.height; ++y) {
    for (Index x = 0; x + w <= d.width; ++x) {
      double ma = 0, mb = 0;
      for (Index dy = 0; dy < w; ++dy)
        for (Index dx = 0; dx < w; ++dx) {
          ma += a((y + dy) * d.width + x + dx);
          mb += b((y + dy) * d.width + x + dx);
        }
      ma /= w * w;
      mb /= w * w;
      double va = 0, vb = 0, cov = 0;
      for (Index dy = 0; dy < w; ++dy)
        for (Index dx = 0; dx < w; ++dx) {
          const double ea = a((y + dy) * d.width + x + dx) - ma;
          const double eb = b((y + dy) * d.width + x + dx) - mb;
          va += ea * ea;
          vb += eb * eb;
          cov += ea * eb;
        }
      va /= w * w;
      vb /= w * w;
      cov /= w * w;
      total += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++windows;
    }
  }
  return total / windows;
}

Vector<double> random_frame(const FrameDims& d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  Vector<double> v(d.pixels());
  for (Index i = 0; i < v.size(); ++i) v(i) = u(rng);
  return v;
}

SyntheticSceneConfig small_scene() {
  SyntheticSceneConfig cfg;
  cfg.height = 24;
  cfg.width = 20;
  cfg.num_frames = 40;
  cfg.fg_size = 5;
  cfg.static_fg_size = 6;
  cfg.pure_bg_frames = {2, 3, 4, 5, 6, 7, 8, 9};
  cfg.static_fg_window = FrameWindow{34, 40};
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST_CASE("scene without foreground or noise has the background rank") {
  auto cfg = small_scene();
  cfg.fg_objects = 0;
  cfg.static_fg_window.reset();
  cfg.noise_sigma = 0.0;
  for (const Index rank : {1, 2, 3}) {
    cfg.bg_rank = rank;
    const Scene s = generate_scene(cfg);
    CHECK(s.frames == s.background);
    CHECK(numerical_rank(s.frames) <= rank);
    CHECK(s.masks.norm() == 0.0);
  }
}

TEST_CASE("pure background frames carry only noise") {
  const auto cfg = small_scene();
  const Scene s = generate_scene(cfg);
  REQUIRE(s.frames.rows() == 24 * 20);
  REQUIRE(s.frames.cols() == 40);
  for (const Index t : cfg.pure_bg_frames) {
    CHECK(s.masks.col(t).sum() == 0.0);
    const double rms = (s.frames.col(t) - s.background.col(t)).norm() / std::sqrt(24.0 * 20.0);
    CHECK(rms == doctest::Approx(cfg.noise_sigma).epsilon(0.15));
  }
}

TEST_CASE("mask coverage matches the rectangle area") {
  auto cfg = small_scene();
  cfg.fg_objects = 1;
  cfg.static_fg_window.reset();
  cfg.pure_bg_frames.clear();
  const Scene s = generate_scene(cfg);
  const double expected = 25.0 / (24.0 * 20.0);
  const double fraction = s.masks.sum() / static_cast<double>(s.masks.size());
  CHECK(std::abs(fraction - expected) <= 0.01 * expected);
}

TEST_CASE("parked object stays put") {
  const auto cfg = small_scene();
  auto still = cfg;
  still.fg_objects = 0;
  const Scene s = generate_scene(still);
  for (Index t = 35; t < 40; ++t) CHECK(s.masks.col(t) == s.masks.col(34));
  CHECK(s.masks.col(34).sum() == 36.0);
  CHECK(s.masks.col(33).sum() == 0.0);
}

TEST_CASE("scene generation is deterministic and validated") {
  const auto cfg = small_scene();
  CHECK(generate_scene(cfg).frames == generate_scene(cfg).frames);
  auto bad = cfg;
  bad.fg_size = 30;
  CHECK_THROWS_AS(generate_scene(bad), ConfigError);
  bad = cfg;
  bad.pure_bg_frames.push_back(40);
  CHECK_THROWS_AS(generate_scene(bad), ConfigError);
  bad = cfg;
  bad.static_fg_window = FrameWindow{30, 41};
  CHECK_THROWS_AS(generate_scene(bad), ConfigError);
}

TEST_CASE("video-like layout") {
  const auto cfg = SyntheticSceneConfig::video_like(120, 0);
  CHECK(cfg.pure_bg_frames.front() == 3);
  CHECK(cfg.pure_bg_frames.size() == 12);
  CHECK(cfg.static_fg_window->begin == 108);
  CHECK(cfg.static_fg_window->end == 120);
  CHECK(cfg.resolved_onset() == 40);
}

TEST_CASE("ssim of a frame with itself is exactly one") {
  const FrameDims d{16, 12};
  const Vector<double> f = random_frame(d, 1);
  CHECK(ssim_frame(f, f, d) == 1.0);
  M frames(d.pixels(), 3);
  for (Index t = 0; t < 3; ++t) frames.col(t) = random_frame(d, 10 + t);
  CHECK(mean_ssim(frames, frames, d) == 1.0);
}

TEST_CASE("ssim is symmetric and matches the windowed definition") {
  const FrameDims d{14, 13};
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Vector<double> a = random_frame(d, 20 + s);
    const Vector<double> b = 0.5 * a + 0.5 * random_frame(d, 40 + s);
    MetricConfig cfg;
    cfg.ssim_window = 7;
    CHECK(ssim_frame(a, b, d, cfg) == doctest::Approx(ssim_frame(b, a, d, cfg)).epsilon(1e-14));
    CHECK(ssim_frame(a, b, d, cfg) == doctest::Approx(ssim_by_loops(a, b, d, 7)).epsilon(1e-10));
  }
}

TEST_CASE("constant offset lowers ssim, more so for larger offsets") {
  const FrameDims d{8, 8};
  const Vector<double> base = Vector<double>::Constant(64, 100.0);
  const double c1 = std::pow(0.01 * 255.0, 2);
  for (const Index w : {3, 7}) {
    MetricConfig cfg;
    cfg.ssim_window = w;
    double previous = 1.0;
    for (const double c : {1.0, 5.0, 20.0, 80.0}) {
      const Vector<double> shifted = base.array() + c;
      const double value = ssim_frame(shifted, base, d, cfg);
      // Constant frames: only the luminance term differs from one.
      const double expected = (2.0 * 100.0 * (100.0 + c) + c1) / (100.0 * 100.0 + (100.0 + c) * (100.0 + c) + c1);
      CHECK(value == doctest::Approx(expected).epsilon(1e-12));
      CHECK(value < previous);
      previous = value;
    }
  }
}

TEST_CASE("sign-flipped mean-zero structure gives negative ssim") {
  const FrameDims d{8, 8};
  // Period-3 stripes: every 3x3 window has mean zero, so luminance is exactly one.
  const double stripe[3] = {100.0, -100.0, 0.0};
  Vector<double> board(64);
  for (Index y = 0; y < 8; ++y)
    for (Index x = 0; x < 8; ++x) board(y * 8 + x) = stripe[x % 3];
  MetricConfig cfg;
  cfg.ssim_window = 3;
  CHECK(ssim_frame(-board, board, d, cfg) < 0.0);
  M est(64, 2), truth(64, 2);
  est << -board, -board;
  truth << board, board;
  CHECK(mean_ssim(est, truth, d, cfg) < 0.0);
}

TEST_CASE("ssim argument checks") {
  const FrameDims d{8, 8};
  const Vector<double> f = Vector<double>::Ones(64);
  CHECK_THROWS_AS(ssim_frame(f, Vector<double>::Ones(63), d), DimensionError);
  CHECK_THROWS_AS(ssim_frame(f, f, d), DimensionError);  // window 11 > 8
  MetricConfig even;
  even.ssim_window = 4;
  CHECK_THROWS_AS(ssim_frame(f, f, d, even), PreconditionError);
  CHECK_THROWS_AS(mean_ssim(M::Ones(64, 2), M::Ones(64, 3), d), DimensionError);
}

TEST_CASE("pgm round trip, comments and ordering") {
  const auto dir = scratch("pgm");
  const FrameDims d{3, 4};
  Vector<double> px(12);
  px << 0, 1, 2, 3, 4, 5, 250, 255, 300, -5, 127.4, 127.6;
  write_pgm(dir / "one.pgm", px, d);
  const Image img = read_pgm(dir / "one.pgm");
  CHECK(img.dims.height == 3);
  CHECK(img.dims.width == 4);
  Vector<double> expected(12);
  expected << 0, 1, 2, 3, 4, 5, 250, 255, 255, 0, 127, 128;
  CHECK(img.pixels == expected);

  {
    std::ofstream out(dir / "commented.pgm", std::ios::binary);
    out << "P5\n# made by hand\n2 1\n# max\n255\n";
    out.put(static_cast<char>(7));
    out.put(static_cast<char>(9));
  }
  const Image hand = read_pgm(dir / "commented.pgm");
  CHECK(hand.pixels(0) == 7.0);
  CHECK(hand.pixels(1) == 9.0);

  {
    std::ofstream out(dir / "ascii.pgm");
    out << "P2\n1 1\n255\n0\n";
  }
  CHECK_THROWS_AS(read_pgm(dir / "ascii.pgm"), ParseError);

  const auto frames_dir = scratch("frames");
  M frames(12, 3);
  frames << Vector<double>::Constant(12, 10), Vector<double>::Constant(12, 20), Vector<double>::Constant(12, 30);
  write_frame_directory(frames_dir, frames, d);
  const FrameStack stack = read_frame_directory(frames_dir);
  CHECK(stack.frames == frames);
  CHECK(stack.files.front().filename() == "frame_0000.pgm");
}

TEST_CASE("choose_k rounds up") {
  CHECK(choose_k(60, 1) == 60);
  CHECK(choose_k(60, 4) == 15);
  CHECK(choose_k(12, 5) == 3);
  CHECK_THROWS_AS(choose_k(0, 2), ConfigError);
}

TEST_CASE("background experiment with huge weights reproduces the clean background") {
  auto cfg = small_scene();
  cfg.noise_sigma = 0.0;
  const Scene s = generate_scene(cfg);
  BackgroundExperimentConfig run;
  run.bg_frame_indices = cfg.pure_bg_frames;
  run.k = 8;
  run.weight_lo = 1e5;
  run.weight_hi = 2e5;
  CHECK(run.resolved_rank() == 9);
  const auto rep = run_background_experiment(s.frames, s.dims, run, &s.background);
  REQUIRE(rep.background.cols() == 40);
  for (const Index t : cfg.pure_bg_frames) {
    CHECK((rep.background.col(t) - s.background.col(t)).norm() <= 1e-6 * s.background.col(t).norm());
  }
  CHECK(rep.a1_frames.size() == 8);
  CHECK(rep.ssim.size() == 40);
}

TEST_CASE("background experiment keeps input frame order") {
  auto cfg = small_scene();
  cfg.fg_objects = 0;
  cfg.static_fg_window.reset();
  cfg.noise_sigma = 0.0;
  const Scene s = generate_scene(cfg);
  BackgroundExperimentConfig run;
  run.bg_frame_indices = {9, 2, 5, 7};
  run.k = 1;
  run.seed = 4;
  run.swlr.epsilon = 1e-12;
  run.swlr.max_iters = 5000;
  const auto rep = run_background_experiment(s.frames, s.dims, run);
  // Foreground-free input of rank 2 = r: every frame comes back in place.
  CHECK((rep.background - s.frames).norm() <= 1e-8 * s.frames.norm());
  for (const Index t : rep.a1_frames) CHECK(std::find(run.bg_frame_indices.begin(), run.bg_frame_indices.end(), t) != run.bg_frame_indices.end());
}

TEST_CASE("background experiment errors") {
  const auto cfg = small_scene();
  const Scene s = generate_scene(cfg);
  BackgroundExperimentConfig run;
  run.bg_frame_indices = cfg.pure_bg_frames;
  run.k = 9;
  CHECK_THROWS_AS(run_background_experiment(s.frames, s.dims, run), ConfigError);
  run.k = 2;
  run.bg_frame_indices = {50};
  CHECK_THROWS_AS(run_background_experiment(s.frames, s.dims, run), ConfigError);
  run.bg_frame_indices = cfg.pure_bg_frames;
  CHECK_THROWS_AS(run_background_experiment(s.frames, FrameDims{5, 5}, run), DimensionError);
  CHECK_THROWS_AS(parse_solver("svd"), ConfigError);
  CHECK(parse_solver("apg") == SolverKind::Apg);
}

TEST_CASE("background experiment is deterministic") {
  const auto cfg = small_scene();
  const Scene s = generate_scene(cfg);
  BackgroundExperimentConfig run;
  run.bg_frame_indices = cfg.pure_bg_frames;
  run.k = 4;
  run.seed = 9;
  const auto a = run_background_experiment(s.frames, s.dims, run, &s.background);
  const auto b = run_background_experiment(s.frames, s.dims, run, &s.background);
  CHECK(a.background == b.background);
  CHECK(a.a1_frames == b.a1_frames);
  CHECK(a.ssim == b.ssim);
}

TEST_CASE("heavier weights keep X1 closer to A1") {
  const auto cfg = small_scene();
  const Scene s = generate_scene(cfg);
  BackgroundExperimentConfig run;
  run.bg_frame_indices = cfg.pure_bg_frames;
  run.k = 4;
  const auto dev = weight_sweep(s.frames, s.dims, run, {1.0, 10.0, 100.0});
  REQUIRE(dev.size() == 3);
  CHECK(dev[0] > dev[1]);
  CHECK(dev[1] > dev[2]);
}

TEST_CASE("scaling benchmark rows and csv") {
  ScalingConfig cfg;
  cfg.frame_counts = {40, 80, 120};
  cfg.k = 6;
  cfg.scene.height = 12;
  cfg.scene.width = 12;
  cfg.scene.fg_size = 3;
  cfg.rpca.max_iters = 30;
  const auto rows = scaling_benchmark(cfg);
  CHECK(rows.size() == 9);
  std::ostringstream out;
  write_scaling_csv(out, rows);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "solver,n,wall_ms");
  int count = 0;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 9);
  cfg.frame_counts = {80, 40};
  CHECK_THROWS_AS(scaling_benchmark(cfg), ConfigError);
}

TEST_CASE("growth exponent of exact power laws") {
  std::vector<ScalingRow> rows;
  for (const Index n : {10, 20, 40, 80}) {
    rows.push_back({SolverKind::Swlr, n, 3.0 * static_cast<double>(n), 1});
    rows.push_back({SolverKind::Apg, n, 0.5 * static_cast<double>(n * n), 1});
  }
  CHECK(growth_exponent(rows, SolverKind::Swlr) == doctest::Approx(1.0));
  CHECK(growth_exponent(rows, SolverKind::Apg) == doctest::Approx(2.0));
  CHECK_THROWS_AS(growth_exponent(rows, SolverKind::Iealm), ConfigError);
}

TEST_CASE("ssim csv layout") {
  BackgroundReport a;
  a.solver = SolverKind::Swlr;
  a.ssim = {0.5, 0.25};
  std::ostringstream out;
  write_ssim_csv(out, {a});
  CHECK(out.str() == "frame,ssim,solver\n0,0.500000,swlr\n1,0.250000,swlr\n");
}

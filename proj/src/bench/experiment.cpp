#include "wlra/bench/experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

namespace wlra::bench {
namespace {

constexpr std::uint64_t kWeightStream = 0x9e3779b97f4a7c15ULL;

std::vector<Index> sample_frames(const std::vector<Index>& pool, Index k, std::uint64_t seed) {
  std::vector<Index> picked = pool;
  std::sort(picked.begin(), picked.end());
  picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
  std::mt19937_64 rng(seed);
  std::shuffle(picked.begin(), picked.end(), rng);
  picked.resize(static_cast<std::size_t>(k));
  std::sort(picked.begin(), picked.end());
  return picked;
}

struct SwlrRun {
  Matrix<double> background;
  ConvergenceTrace trace;
  std::vector<Index> a1_frames;
  double x1_deviation = 0.0;
  double wall_ms = 0.0;
};

SwlrRun run_swlr(const Matrix<double>& frames, const BackgroundExperimentConfig& cfg) {
  const Index n = frames.cols();
  if (cfg.k < 1) throw ConfigError("background experiment: sWLR needs k >= 1");
  for (const Index t : cfg.bg_frame_indices) {
    if (t < 0 || t >= n) throw ConfigError("background experiment: bg frame index out of range");
  }
  std::vector<Index> pool = cfg.bg_frame_indices;
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  if (cfg.k > static_cast<Index>(pool.size())) {
    throw ConfigError(fmt::format("background experiment: k = {} exceeds the {} available background frames",
                                  cfg.k, pool.size()));
  }
  const Index r = cfg.resolved_rank();
  if (r < cfg.k || r > std::min(frames.rows(), n)) {
    throw ConfigError("background experiment: need k <= r <= min(m, n)");
  }

  SwlrRun run;
  run.a1_frames = sample_frames(pool, cfg.k, cfg.seed);
  std::vector<Index> order = run.a1_frames;
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  for (const Index t : order) taken[static_cast<std::size_t>(t)] = true;
  for (Index t = 0; t < n; ++t) {
    if (!taken[static_cast<std::size_t>(t)]) order.push_back(t);
  }
  Matrix<double> permuted(frames.rows(), n);
  for (Index j = 0; j < n; ++j) permuted.col(j) = frames.col(order[static_cast<std::size_t>(j)]);

  const PartitionedMatrix<double> pm(std::move(permuted), cfg.k, r);
  const auto weights = WeightMask<double>::uniform(frames.rows(), cfg.k, cfg.weight_lo, cfg.weight_hi,
                                                   cfg.seed ^ kWeightStream);
  const auto start = std::chrono::steady_clock::now();
  SwlrSolution<double> sol = solve(pm, weights, cfg.swlr);
  run.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  const Matrix<double> estimate = sol.state.assemble();
  run.background.resize(frames.rows(), n);
  for (Index j = 0; j < n; ++j) run.background.col(order[static_cast<std::size_t>(j)]) = estimate.col(j);
  run.x1_deviation = (sol.state.x1 - pm.a1()).norm();
  run.trace = std::move(sol.trace);
  return run;
}

}  // namespace

const char* to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::Swlr: return "swlr";
    case SolverKind::Iealm: return "iealm";
    case SolverKind::Apg: return "apg";
  }
  return "unknown";
}

SolverKind parse_solver(const std::string& name) {
  if (name == "swlr") return SolverKind::Swlr;
  if (name == "iealm") return SolverKind::Iealm;
  if (name == "apg") return SolverKind::Apg;
  throw ConfigError("unknown solver '" + name + "' (expected swlr, iealm or apg)");
}

Index choose_k(Index available, Index divisor) {
  if (available < 1 || divisor < 1) throw ConfigError("choose_k: arguments must be positive");
  return (available + divisor - 1) / divisor;
}

BackgroundReport run_background_experiment(const Matrix<double>& frames, const FrameDims& dims,
                                           const BackgroundExperimentConfig& cfg,
                                           const Matrix<double>* truth) {
  if (frames.rows() != dims.pixels()) throw DimensionError("background experiment: frame size mismatch");
  if (truth && (truth->rows() != frames.rows() || truth->cols() != frames.cols())) {
    throw DimensionError("background experiment: ground truth shape mismatch");
  }
  BackgroundReport report;
  report.solver = cfg.solver;
  if (cfg.solver == SolverKind::Swlr) {
    SwlrRun run = run_swlr(frames, cfg);
    report.background = std::move(run.background);
    report.trace = std::move(run.trace);
    report.a1_frames = std::move(run.a1_frames);
    report.x1_deviation = run.x1_deviation;
    report.wall_ms = run.wall_ms;
  } else {
    const auto start = std::chrono::steady_clock::now();
    RpcaResult<double> res = cfg.solver == SolverKind::Iealm ? iealm(frames, cfg.rpca) : apg(frames, cfg.rpca);
    report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    report.background = std::move(res.low_rank);
    report.trace = std::move(res.trace);
    report.x1_deviation = std::numeric_limits<double>::quiet_NaN();
  }
  if (truth) {
    report.ssim = ssim_per_frame(report.background, *truth, dims, cfg.metric);
    report.mean_ssim = std::accumulate(report.ssim.begin(), report.ssim.end(), 0.0) /
                       static_cast<double>(report.ssim.size());
  }
  return report;
}

std::vector<double> weight_sweep(const Matrix<double>& frames, const FrameDims& dims,
                                 const BackgroundExperimentConfig& cfg, const std::vector<double>& scales) {
  std::vector<double> deviations;
  for (const double scale : scales) {
    BackgroundExperimentConfig scaled = cfg;
    scaled.solver = SolverKind::Swlr;
    scaled.weight_lo = cfg.weight_lo * scale;
    scaled.weight_hi = cfg.weight_hi * scale;
    deviations.push_back(run_background_experiment(frames, dims, scaled).x1_deviation);
  }
  return deviations;
}

std::vector<ScalingRow> scaling_benchmark(const ScalingConfig& cfg) {
  if (cfg.repeats < 1) throw ConfigError("scaling benchmark: repeats must be >= 1");
  if (!std::is_sorted(cfg.frame_counts.begin(), cfg.frame_counts.end())) {
    throw ConfigError("scaling benchmark: frame counts must be increasing");
  }
  const Index pool_size = (4 * cfg.k + 2) / 3;
  std::vector<ScalingRow> rows;
  for (const Index n : cfg.frame_counts) {
    if (n <= pool_size) throw ConfigError(fmt::format("scaling benchmark: n = {} too small for k = {}", n, cfg.k));
    SyntheticSceneConfig scene_cfg = cfg.scene;
    scene_cfg.num_frames = n;
    scene_cfg.pure_bg_frames.clear();
    for (Index t = 0; t < pool_size; ++t) scene_cfg.pure_bg_frames.push_back(t);
    scene_cfg.static_fg_window.reset();
    scene_cfg.illumination_onset = std::max(pool_size, n / 3);
    const Scene scene = generate_scene(scene_cfg);

    for (const SolverKind solver : cfg.solvers) {
      BackgroundExperimentConfig run_cfg;
      run_cfg.solver = solver;
      run_cfg.bg_frame_indices = scene_cfg.pure_bg_frames;
      run_cfg.k = cfg.k;
      run_cfg.weight_lo = cfg.weight_lo;
      run_cfg.weight_hi = cfg.weight_hi;
      run_cfg.swlr = cfg.swlr;
      run_cfg.rpca = cfg.rpca;
      run_cfg.seed = cfg.seed;
      ScalingRow row;
      row.solver = solver;
      row.n = n;
      row.wall_ms = std::numeric_limits<double>::infinity();
      for (int rep = 0; rep < cfg.repeats; ++rep) {
        const BackgroundReport report = run_background_experiment(scene.frames, scene.dims, run_cfg);
        row.wall_ms = std::min(row.wall_ms, report.wall_ms);
        row.iterations = report.trace.iterations();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

double growth_exponent(const std::vector<ScalingRow>& rows, SolverKind solver) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& row : rows) {
    if (row.solver != solver) continue;
    xs.push_back(std::log(static_cast<double>(row.n)));
    ys.push_back(std::log(std::max(row.wall_ms, 1e-6)));
  }
  if (xs.size() < 2) throw ConfigError("growth_exponent: need at least two frame counts");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows) {
  out << "solver,n,wall_ms\n";
  for (const auto& row : rows) out << fmt::format("{},{},{:.3f}\n", to_string(row.solver), row.n, row.wall_ms);
}

void write_ssim_csv(std::ostream& out, const std::vector<BackgroundReport>& reports) {
  out << "frame,ssim,solver\n";
  for (const auto& report : reports) {
    for (std::size_t t = 0; t < report.ssim.size(); ++t) {
      out << fmt::format("{},{:.6f},{}\n", t, report.ssim[t], to_string(report.solver));
    }
  }
}

}  // namespace wlra::bench

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wlra/bench/scene.hpp"
#include "wlra/bench/ssim.hpp"
#include "wlra/rpca.hpp"
#include "wlra/swlr.hpp"

namespace wlra::bench {

enum class SolverKind { Swlr, Iealm, Apg };

const char* to_string(SolverKind kind);
SolverKind parse_solver(const std::string& name);

/// k = ceil(available / divisor), the sampling rule for how many known
/// background frames go into the weighted block.
Index choose_k(Index available, Index divisor);

struct BackgroundExperimentConfig {
  SolverKind solver = SolverKind::Swlr;
  /// Frames known to be (nearly) pure background; sWLR samples k of them.
  std::vector<Index> bg_frame_indices;
  double weight_lo = 5.0;
  double weight_hi = 10.0;
  Index k = 0;
  /// Target rank; unset means k + 1.
  std::optional<Index> r;
  SwlrConfig swlr;
  RpcaConfig rpca;
  MetricConfig metric;
  /// Drives the frame sample and the weight draw.
  std::uint64_t seed = 0;

  Index resolved_rank() const { return r ? *r : k + 1; }
};

struct BackgroundReport {
  SolverKind solver = SolverKind::Swlr;
  Matrix<double> background;  ///< estimate, columns in input frame order
  std::vector<Index> a1_frames;
  std::vector<double> ssim;  ///< per frame; empty without ground truth
  double mean_ssim = 0.0;
  ConvergenceTrace trace;
  /// ||X1 - A1||_F for sWLR, NaN for RPCA.
  double x1_deviation = 0.0;
  double wall_ms = 0.0;
};

/// Runs one solver on the frame matrix. For sWLR the sampled background
/// columns are moved to the front to form A1 (size k), the rest keep their
/// order, and the estimate is permuted back before scoring.
BackgroundReport run_background_experiment(const Matrix<double>& frames, const FrameDims& dims,
                                           const BackgroundExperimentConfig& cfg,
                                           const Matrix<double>* truth = nullptr);

/// ||X1 - A1||_F at each weight interval scale * [lo, hi], same draws and
/// init seed throughout.
std::vector<double> weight_sweep(const Matrix<double>& frames, const FrameDims& dims,
                                 const BackgroundExperimentConfig& cfg,
                                 const std::vector<double>& scales);

struct ScalingConfig {
  std::vector<Index> frame_counts{60, 120, 240};
  std::vector<SolverKind> solvers{SolverKind::Swlr, SolverKind::Iealm, SolverKind::Apg};
  Index k = 15;
  /// Geometry and content template; num_frames, pure_bg_frames and the parked
  /// object are set per frame count.
  SyntheticSceneConfig scene;
  double weight_lo = 500.0;
  double weight_hi = 1000.0;
  SwlrConfig swlr;
  RpcaConfig rpca;
  /// Each timing is the minimum over this many runs.
  int repeats = 1;
  std::uint64_t seed = 0;
};

struct ScalingRow {
  SolverKind solver = SolverKind::Swlr;
  Index n = 0;
  double wall_ms = 0.0;
  int iterations = 0;
};

/// Times each solver at each frame count, strictly one run at a time.
std::vector<ScalingRow> scaling_benchmark(const ScalingConfig& cfg);

/// Least-squares slope of log(wall_ms) against log(n) for one solver.
double growth_exponent(const std::vector<ScalingRow>& rows, SolverKind solver);

/// `solver,n,wall_ms`
void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows);

/// `frame,ssim,solver`
void write_ssim_csv(std::ostream& out, const std::vector<BackgroundReport>& reports);

}  // namespace wlra::bench

// wlra: command-line driver for the solvers, the oracle checks and the
// synthetic video benchmarks.
//
// Exit codes: 0 success / converged, 2 iteration budget exhausted, 1 error.
// Every command that writes files also writes <out>/manifest.json holding the
// fully resolved flag set; `wlra replay --manifest <file>` re-runs it.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wlra/bench/experiment.hpp"
#include "wlra/bench/pgm.hpp"
#include "wlra/bench/scene.hpp"
#include "wlra/io.hpp"
#include "wlra/rpca.hpp"
#include "wlra/swlr.hpp"
#include "wlra/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace wlra;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kBudget = 2;

// Same stream split as the background experiment: weights and init never
// share a generator.
constexpr std::uint64_t kWeightStream = 0x9e3779b97f4a7c15ULL;

/// Resolved configuration of one run. Keys are flag names without dashes so
/// the manifest can be turned back into a command line.
class Manifest {
 public:
  explicit Manifest(std::string command) { doc_["command"] = std::move(command); }

  template <typename T>
  void set(const std::string& flag, const T& value) {
    doc_["flags"][flag] = value;
  }
  void output(const fs::path& p) { doc_["outputs"].push_back(p.filename().string()); }
  void result(const std::string& key, const json& value) { doc_["result"][key] = value; }

  void write(const fs::path& dir) const {
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
    out << doc_.dump(2) << '\n';
  }

 private:
  json doc_;
};

void prepare_out_dir(const fs::path& dir) {
  if (dir.empty()) throw ConfigError("--out is required");
  if (fs::exists(dir) && !fs::is_directory(dir)) throw ConfigError(dir.string() + " exists and is not a directory");
  fs::create_directories(dir);
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw ConfigError(fmt::format("{} '{}' does not exist", what, p.string()));
}

std::string join(const std::vector<Index>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string matrix_name(const std::string& stem, const std::string& format) {
  return stem + (format == "bin" ? ".bin" : ".csv");
}

int finish(bool converged) { return converged ? kOk : kBudget; }

// ---------------------------------------------------------------- solve

struct SolveOptions {
  std::string input;
  std::string out;
  Index k = 0;
  Index rank = 0;
  double weight_lo = 5.0;
  double weight_hi = 10.0;
  std::string weights;
  double epsilon = 1e-7;
  int max_iters = 100;
  std::uint64_t seed = 0;
  std::string init = "gaussian";
  std::string format = "csv";
};

void add_solve(CLI::App& app, SolveOptions& o) {
  auto* cmd = app.add_subcommand("solve", "sWLR on a matrix whose first k columns carry weight W1");
  cmd->add_option("--input", o.input, "matrix file (CSV or WLRA1 binary)")->required();
  cmd->add_option("--out", o.out, "output directory")->required();
  cmd->add_option("--k", o.k, "number of weighted leading columns")->required();
  cmd->add_option("--rank", o.rank, "target rank r")->required();
  cmd->add_option("--weight-lo", o.weight_lo, "W1 ~ U[lo, hi]");
  cmd->add_option("--weight-hi", o.weight_hi);
  cmd->add_option("--weights", o.weights, "m x k weight file, overrides --weight-lo/--weight-hi");
  cmd->add_option("--epsilon", o.epsilon, "stopping threshold");
  cmd->add_option("--max-iters", o.max_iters);
  cmd->add_option("--seed", o.seed);
  cmd->add_option("--init", o.init)->check(CLI::IsMember({"gaussian", "a1"}));
  cmd->add_option("--format", o.format, "output matrix format")->check(CLI::IsMember({"csv", "bin"}));
}

int run_solve(const SolveOptions& o) {
  require_file(o.input, "input");
  if (!o.weights.empty()) require_file(o.weights, "weights");
  prepare_out_dir(o.out);
  const fs::path out(o.out);

  Manifest m("solve");
  m.set("input", fs::absolute(o.input).string());
  m.set("out", fs::absolute(out).string());
  m.set("k", o.k);
  m.set("rank", o.rank);
  m.set("weight-lo", o.weight_lo);
  m.set("weight-hi", o.weight_hi);
  if (!o.weights.empty()) m.set("weights", fs::absolute(o.weights).string());
  m.set("epsilon", o.epsilon);
  m.set("max-iters", o.max_iters);
  m.set("seed", o.seed);
  m.set("init", o.init);
  m.set("format", o.format);
  m.write(out);

  const PartitionedMatrix<double> pm(io::read_matrix(o.input), o.k, o.rank);
  const WeightMask<double> w = o.weights.empty()
                                   ? WeightMask<double>::uniform(pm.rows(), o.k, o.weight_lo, o.weight_hi,
                                                                 o.seed ^ kWeightStream)
                                   : WeightMask<double>(io::read_matrix(o.weights));
  SwlrConfig cfg;
  cfg.epsilon = o.epsilon;
  cfg.max_iters = o.max_iters;
  cfg.seed = o.seed;
  cfg.init = o.init == "a1" ? SwlrInit::FromA1 : SwlrInit::RandomGaussian;
  const SwlrSolution<double> sol = solve(pm, w, cfg);

  auto save = [&](const std::string& stem, const Matrix<double>& a) {
    const fs::path p = out / matrix_name(stem, o.format);
    io::write_matrix(p, a);
    m.output(p);
  };
  save("x1", sol.state.x1);
  save("c", sol.state.c);
  save("d", sol.state.d);
  save("x", sol.state.assemble());
  if (o.weights.empty()) save("w1", w.w1);
  write_trace_csv(out / "trace.csv", sol.trace);
  m.output(out / "trace.csv");

  for (const auto& warning : sol.trace.warnings) std::cerr << "warning: " << warning << '\n';
  m.result("stop", to_string(sol.trace.stop));
  m.result("iterations", sol.trace.iterations());
  m.result("objective", sol.trace.final_objective());
  m.result("rank_recoveries", sol.trace.rank_recoveries);
  m.write(out);
  std::cout << fmt::format("{} after {} iterations, objective {:.10g}\n", to_string(sol.trace.stop),
                           sol.trace.iterations(), sol.trace.final_objective());
  return finish(sol.trace.converged());
}

// ---------------------------------------------------------------- rpca

struct RpcaOptions {
  std::string input;
  std::string out;
  std::string solver = "iealm";
  std::optional<double> lambda;
  double epsilon = 1e-7;
  int max_iters = 1000;
  std::string format = "csv";
};

void add_rpca(CLI::App& app, RpcaOptions& o) {
  auto* cmd = app.add_subcommand("rpca", "robust PCA split A = X + S");
  cmd->add_option("--input", o.input, "matrix file (CSV or WLRA1 binary)")->required();
  cmd->add_option("--out", o.out, "output directory")->required();
  cmd->add_option("--solver", o.solver)->check(CLI::IsMember({"iealm", "apg"}));
  cmd->add_option("--lambda", o.lambda, "l1 weight, default 1/sqrt(max(m, n))");
  cmd->add_option("--epsilon", o.epsilon, "feasibility threshold");
  cmd->add_option("--max-iters", o.max_iters);
  cmd->add_option("--format", o.format, "output matrix format")->check(CLI::IsMember({"csv", "bin"}));
}

int run_rpca(const RpcaOptions& o) {
  require_file(o.input, "input");
  prepare_out_dir(o.out);
  const fs::path out(o.out);

  Manifest m("rpca");
  m.set("input", fs::absolute(o.input).string());
  m.set("out", fs::absolute(out).string());
  m.set("solver", o.solver);
  if (o.lambda) m.set("lambda", *o.lambda);
  m.set("epsilon", o.epsilon);
  m.set("max-iters", o.max_iters);
  m.set("format", o.format);
  m.write(out);

  const Matrix<double> a = io::read_matrix(o.input);
  RpcaConfig cfg;
  cfg.lambda = o.lambda;
  cfg.epsilon = o.epsilon;
  cfg.max_iters = o.max_iters;
  const RpcaResult<double> res = o.solver == "apg" ? apg(a, cfg) : iealm(a, cfg);

  for (const auto& [stem, mat] : {std::pair{"low_rank", &res.low_rank}, std::pair{"sparse", &res.sparse}}) {
    const fs::path p = out / matrix_name(stem, o.format);
    io::write_matrix(p, *mat);
    m.output(p);
  }
  write_trace_csv(out / "trace.csv", res.trace);
  m.output(out / "trace.csv");
  m.result("lambda", cfg.resolved_lambda(a.rows(), a.cols()));
  m.result("stop", to_string(res.trace.stop));
  m.result("iterations", res.trace.iterations());
  m.result("objective", res.trace.final_objective());
  m.write(out);
  std::cout << fmt::format("{} after {} iterations, objective {:.10g}\n", to_string(res.trace.stop),
                           res.trace.iterations(), res.trace.final_objective());
  return finish(res.trace.converged());
}

// ---------------------------------------------------------------- verify

struct VerifyOptions {
  Index rows = 10;
  Index cols = 12;
  Index k = 2;
  Index rank = 4;
  double weight_lo = 5.0;
  double weight_hi = 10.0;
  int trials = 20;
  std::uint64_t seed = 0;
  std::string out;
};

void add_verify(CLI::App& app, VerifyOptions& o) {
  auto* cmd = app.add_subcommand("verify", "cross-check sWLR and the closed form against the general solver");
  cmd->add_option("--rows", o.rows);
  cmd->add_option("--cols", o.cols);
  cmd->add_option("--k", o.k);
  cmd->add_option("--rank", o.rank);
  cmd->add_option("--weight-lo", o.weight_lo);
  cmd->add_option("--weight-hi", o.weight_hi);
  cmd->add_option("--trials", o.trials);
  cmd->add_option("--seed", o.seed);
  cmd->add_option("--out", o.out, "optional directory for report.txt and the manifest");
}

int run_verify(const VerifyOptions& o) {
  verify::BracketConfig b;
  b.rows = o.rows;
  b.cols = o.cols;
  b.k = o.k;
  b.r = o.rank;
  b.weight_lo = o.weight_lo;
  b.weight_hi = o.weight_hi;
  b.trials = o.trials;
  b.seed = o.seed;
  b.validate();
  verify::GhsCheckConfig g;
  g.rows = o.rows;
  g.cols = o.cols;
  g.k = o.k;
  g.r = o.rank;
  g.trials = o.trials;
  g.seed = o.seed;
  g.validate();

  std::optional<Manifest> m;
  if (!o.out.empty()) {
    prepare_out_dir(o.out);
    m.emplace("verify");
    m->set("rows", o.rows);
    m->set("cols", o.cols);
    m->set("k", o.k);
    m->set("rank", o.rank);
    m->set("weight-lo", o.weight_lo);
    m->set("weight-hi", o.weight_hi);
    m->set("trials", o.trials);
    m->set("seed", o.seed);
    m->set("out", fs::absolute(o.out).string());
    m->write(o.out);
  }

  std::ostringstream report;
  const bool ok = verify::write_report(report, b, verify::run_bracketing(b), verify::run_ghs_check(g));
  std::cout << report.str();
  if (m) {
    const fs::path p = fs::path(o.out) / "report.txt";
    std::ofstream(p) << report.str();
    m->output(p);
    m->result("all_pass", ok);
    m->write(o.out);
  }
  return ok ? kOk : kError;
}

// ---------------------------------------------------------------- scene

struct SceneOptions {
  std::string out;
  Index height = 64;
  Index width = 64;
  Index frames = 120;
  Index bg_rank = 2;
  Index fg_objects = 3;
  Index fg_size = 10;
  double fg_magnitude = 70.0;
  double noise = 1.0;
  Index static_fg_size = 24;
  bool no_static_fg = false;
  double illumination = 70.0;
  Index onset = -1;
  std::uint64_t seed = 0;
};

void add_scene_flags(CLI::App* cmd, SceneOptions& o) {
  cmd->add_option("--height", o.height);
  cmd->add_option("--width", o.width);
  cmd->add_option("--frames", o.frames);
  cmd->add_option("--bg-rank", o.bg_rank, "texture plus bg_rank - 1 illumination components");
  cmd->add_option("--fg-objects", o.fg_objects, "moving rectangles");
  cmd->add_option("--fg-size", o.fg_size);
  cmd->add_option("--fg-magnitude", o.fg_magnitude);
  cmd->add_option("--noise", o.noise, "Gaussian noise sigma");
  cmd->add_option("--static-fg-size", o.static_fg_size, "side of the parked object");
  cmd->add_flag("--no-static-fg", o.no_static_fg, "omit the parked object");
  cmd->add_option("--illumination", o.illumination, "illumination amplitude");
  cmd->add_option("--onset", o.onset, "first lit frame, negative for frames / 3");
}

void record_scene_flags(Manifest& m, const SceneOptions& o) {
  m.set("height", o.height);
  m.set("width", o.width);
  m.set("frames", o.frames);
  m.set("bg-rank", o.bg_rank);
  m.set("fg-objects", o.fg_objects);
  m.set("fg-size", o.fg_size);
  m.set("fg-magnitude", o.fg_magnitude);
  m.set("noise", o.noise);
  m.set("static-fg-size", o.static_fg_size);
  m.set("no-static-fg", o.no_static_fg);
  m.set("illumination", o.illumination);
  m.set("onset", o.onset);
}

bench::SyntheticSceneConfig scene_config(const SceneOptions& o, std::uint64_t seed) {
  auto cfg = bench::SyntheticSceneConfig::video_like(o.frames, seed);
  cfg.height = o.height;
  cfg.width = o.width;
  cfg.bg_rank = o.bg_rank;
  cfg.fg_objects = o.fg_objects;
  cfg.fg_size = o.fg_size;
  cfg.fg_magnitude = o.fg_magnitude;
  cfg.noise_sigma = o.noise;
  cfg.static_fg_size = o.static_fg_size;
  if (o.no_static_fg) cfg.static_fg_window.reset();
  cfg.illumination_amplitude = o.illumination;
  cfg.illumination_onset = o.onset;
  cfg.validate();
  return cfg;
}

void add_scene(CLI::App& app, SceneOptions& o) {
  auto* cmd = app.add_subcommand("scene", "write a synthetic video as PGM directories");
  cmd->add_option("--out", o.out, "output directory")->required();
  cmd->add_option("--seed", o.seed);
  add_scene_flags(cmd, o);
}

int run_scene(const SceneOptions& o) {
  const auto cfg = scene_config(o, o.seed);
  prepare_out_dir(o.out);
  const fs::path out(o.out);
  Manifest m("scene");
  m.set("out", fs::absolute(out).string());
  m.set("seed", o.seed);
  record_scene_flags(m, o);
  m.write(out);

  const bench::Scene scene = bench::generate_scene(cfg);
  bench::write_frame_directory(out / "frames", scene.frames, scene.dims);
  bench::write_frame_directory(out / "background", scene.background, scene.dims, "background_");
  bench::write_frame_directory(out / "masks", 255.0 * scene.masks, scene.dims, "mask_");
  std::ofstream(out / "bg_frames.txt") << join(cfg.pure_bg_frames) << '\n';
  for (const char* p : {"frames", "background", "masks", "bg_frames.txt"}) m.output(out / p);

  const Index bg_rank = numerical_rank(scene.background);
  const bool ok = bg_rank <= cfg.bg_rank;
  std::cout << fmt::format("rank check: rank(background) = {} (bg_rank {}) {}\n", bg_rank, cfg.bg_rank,
                           ok ? "ok" : "VIOLATED");
  m.result("background_rank", bg_rank);
  if (o.noise == 0.0 && o.fg_objects == 0 && !cfg.static_fg_window) {
    const Index frame_rank = numerical_rank(scene.frames);
    std::cout << fmt::format("rank check: rank(frames) = {}\n", frame_rank);
    m.result("frame_rank", frame_rank);
  }
  std::cout << "pure background frames: " << join(cfg.pure_bg_frames) << '\n';
  m.result("pure_bg_frames", cfg.pure_bg_frames);
  m.write(out);
  return ok ? kOk : kError;
}

// ---------------------------------------------------------------- bench-scaling

struct ScalingOptions {
  std::string out;
  std::vector<Index> counts{60, 120, 240};
  std::vector<std::string> solvers{"swlr", "iealm", "apg"};
  Index k = 15;
  Index height = 64;
  Index width = 64;
  double weight_lo = 500.0;
  double weight_hi = 1000.0;
  double epsilon = 1e-7;
  int max_iters = 100;
  int rpca_max_iters = 1000;
  int repeats = 1;
  std::uint64_t seed = 0;
};

void add_scaling(CLI::App& app, ScalingOptions& o) {
  auto* cmd = app.add_subcommand("bench-scaling", "wall time against frame count for each solver");
  cmd->add_option("--out", o.out, "output directory")->required();
  cmd->add_option("--counts", o.counts, "frame counts")->delimiter(',');
  cmd->add_option("--solver", o.solvers, "solvers to time")
      ->delimiter(',')
      ->check(CLI::IsMember({"swlr", "iealm", "apg"}));
  cmd->add_option("--k", o.k, "weighted background frames");
  cmd->add_option("--height", o.height);
  cmd->add_option("--width", o.width);
  cmd->add_option("--weight-lo", o.weight_lo);
  cmd->add_option("--weight-hi", o.weight_hi);
  cmd->add_option("--epsilon", o.epsilon, "threshold for every solver");
  cmd->add_option("--max-iters", o.max_iters, "sWLR budget");
  cmd->add_option("--rpca-max-iters", o.rpca_max_iters, "iEALM / APG budget");
  cmd->add_option("--repeats", o.repeats, "timing is the minimum over repeats");
  cmd->add_option("--seed", o.seed);
}

int run_scaling(const ScalingOptions& o) {
  prepare_out_dir(o.out);
  const fs::path out(o.out);
  Manifest m("bench-scaling");
  m.set("out", fs::absolute(out).string());
  m.set("counts", o.counts);
  m.set("solver", o.solvers);
  m.set("k", o.k);
  m.set("height", o.height);
  m.set("width", o.width);
  m.set("weight-lo", o.weight_lo);
  m.set("weight-hi", o.weight_hi);
  m.set("epsilon", o.epsilon);
  m.set("max-iters", o.max_iters);
  m.set("rpca-max-iters", o.rpca_max_iters);
  m.set("repeats", o.repeats);
  m.set("seed", o.seed);
  m.write(out);

  bench::ScalingConfig cfg;
  cfg.frame_counts = o.counts;
  cfg.solvers.clear();
  for (const auto& s : o.solvers) cfg.solvers.push_back(bench::parse_solver(s));
  cfg.k = o.k;
  cfg.scene.height = o.height;
  cfg.scene.width = o.width;
  cfg.scene.seed = o.seed;
  cfg.weight_lo = o.weight_lo;
  cfg.weight_hi = o.weight_hi;
  cfg.swlr.epsilon = o.epsilon;
  cfg.swlr.max_iters = o.max_iters;
  cfg.rpca.epsilon = o.epsilon;
  cfg.rpca.max_iters = o.rpca_max_iters;
  cfg.repeats = o.repeats;
  cfg.seed = o.seed;
  const auto rows = bench::scaling_benchmark(cfg);

  std::ofstream csv(out / "scaling.csv");
  bench::write_scaling_csv(csv, rows);
  m.output(out / "scaling.csv");
  bench::write_scaling_csv(std::cout, rows);
  if (o.counts.size() >= 2) {
    for (const auto solver : cfg.solvers) {
      const double e = bench::growth_exponent(rows, solver);
      std::cerr << fmt::format("{}: wall time ~ n^{:.2f}\n", bench::to_string(solver), e);
      m.result(std::string("exponent_") + bench::to_string(solver), e);
    }
  }
  m.write(out);
  return kOk;
}

// ---------------------------------------------------------------- bench-background

struct BackgroundOptions {
  std::string input;
  std::string truth;
  std::vector<Index> bg_frames;
  std::string out;
  std::vector<std::string> solvers{"swlr", "iealm", "apg"};
  Index k = 0;
  Index rank = 0;
  double weight_lo = 5.0;
  double weight_hi = 10.0;
  double epsilon = 1e-7;
  int max_iters = 100;
  int rpca_max_iters = 1000;
  std::vector<double> sweep{1.0, 10.0, 100.0};
  bool no_sweep = false;
  std::uint64_t seed = 0;
  SceneOptions scene;
};

void add_background(CLI::App& app, BackgroundOptions& o) {
  auto* cmd = app.add_subcommand("bench-background",
                                 "background estimation on a PGM directory or a generated scene");
  cmd->add_option("--input", o.input, "directory of PGM frames; omitted means a generated scene");
  cmd->add_option("--truth", o.truth, "directory of ground-truth background PGMs");
  cmd->add_option("--bg-frames", o.bg_frames, "indices of pure background frames (with --input)")
      ->delimiter(',');
  cmd->add_option("--out", o.out, "output directory")->required();
  cmd->add_option("--solver", o.solvers)->delimiter(',')->check(CLI::IsMember({"swlr", "iealm", "apg"}));
  cmd->add_option("--k", o.k, "weighted frames, 0 means every pure background frame");
  cmd->add_option("--rank", o.rank, "target rank, 0 means k + 1");
  cmd->add_option("--weight-lo", o.weight_lo);
  cmd->add_option("--weight-hi", o.weight_hi);
  cmd->add_option("--epsilon", o.epsilon, "threshold for every solver");
  cmd->add_option("--max-iters", o.max_iters, "sWLR budget");
  cmd->add_option("--rpca-max-iters", o.rpca_max_iters, "iEALM / APG budget");
  cmd->add_option("--sweep", o.sweep, "weight interval scales for the ||X1 - A1|| sweep")->delimiter(',');
  cmd->add_flag("--no-sweep", o.no_sweep, "skip the weight sweep");
  cmd->add_option("--seed", o.seed, "drives the scene, the frame sample, the weights and the init");
  add_scene_flags(cmd, o.scene);
}

int run_background(const BackgroundOptions& o) {
  if (!o.input.empty() && !fs::is_directory(o.input)) throw ConfigError("input '" + o.input + "' is not a directory");
  if (!o.truth.empty() && !fs::is_directory(o.truth)) throw ConfigError("truth '" + o.truth + "' is not a directory");
  if (!o.input.empty() && o.bg_frames.empty()) throw ConfigError("--bg-frames is required with --input");
  prepare_out_dir(o.out);
  const fs::path out(o.out);

  Manifest m("bench-background");
  if (!o.input.empty()) {
    m.set("input", fs::absolute(o.input).string());
    m.set("bg-frames", o.bg_frames);
  } else {
    record_scene_flags(m, o.scene);
  }
  if (!o.truth.empty()) m.set("truth", fs::absolute(o.truth).string());
  m.set("out", fs::absolute(out).string());
  m.set("solver", o.solvers);
  m.set("k", o.k);
  m.set("rank", o.rank);
  m.set("weight-lo", o.weight_lo);
  m.set("weight-hi", o.weight_hi);
  m.set("epsilon", o.epsilon);
  m.set("max-iters", o.max_iters);
  m.set("rpca-max-iters", o.rpca_max_iters);
  m.set("sweep", o.sweep);
  m.set("no-sweep", o.no_sweep);
  m.set("seed", o.seed);
  m.write(out);

  Matrix<double> frames;
  bench::FrameDims dims;
  std::optional<Matrix<double>> truth;
  std::vector<Index> pool = o.bg_frames;
  if (!o.input.empty()) {
    auto stack = bench::read_frame_directory(o.input);
    frames = std::move(stack.frames);
    dims = stack.dims;
  } else {
    const auto cfg = scene_config(o.scene, o.seed);
    bench::Scene scene = bench::generate_scene(cfg);
    frames = std::move(scene.frames);
    dims = scene.dims;
    truth = std::move(scene.background);
    pool = cfg.pure_bg_frames;
  }
  if (!o.truth.empty()) {
    auto stack = bench::read_frame_directory(o.truth);
    if (stack.dims.height != dims.height || stack.dims.width != dims.width) {
      throw DimensionError("truth frames differ in size from the input frames");
    }
    truth = std::move(stack.frames);
  }

  bench::BackgroundExperimentConfig cfg;
  cfg.bg_frame_indices = pool;
  cfg.k = o.k > 0 ? o.k : static_cast<Index>(pool.size());
  if (o.rank > 0) cfg.r = o.rank;
  cfg.weight_lo = o.weight_lo;
  cfg.weight_hi = o.weight_hi;
  cfg.swlr.epsilon = o.epsilon;
  cfg.swlr.max_iters = o.max_iters;
  cfg.rpca.epsilon = o.epsilon;
  cfg.rpca.max_iters = o.rpca_max_iters;
  cfg.seed = o.seed;

  std::vector<bench::BackgroundReport> reports;
  bool all_converged = true;
  for (const auto& name : o.solvers) {
    cfg.solver = bench::parse_solver(name);
    reports.push_back(bench::run_background_experiment(frames, dims, cfg, truth ? &*truth : nullptr));
    const auto& rep = reports.back();
    all_converged = all_converged && rep.trace.converged();
    bench::write_frame_directory(out / ("background_" + name), rep.background, dims, "background_");
    m.output(out / ("background_" + name));
    std::string line = fmt::format("{}: {} after {} iterations, {:.1f} ms", name, to_string(rep.trace.stop),
                                   rep.trace.iterations(), rep.wall_ms);
    if (truth) line += fmt::format(", mean ssim {:.4f}", rep.mean_ssim);
    std::cout << line << '\n';
    m.result(name, json{{"stop", to_string(rep.trace.stop)},
                        {"iterations", rep.trace.iterations()},
                        {"mean_ssim", truth ? json(rep.mean_ssim) : json()},
                        {"a1_frames", rep.a1_frames}});
  }
  if (truth) {
    std::ofstream csv(out / "ssim.csv");
    bench::write_ssim_csv(csv, reports);
    m.output(out / "ssim.csv");
  }

  if (!o.no_sweep && !o.sweep.empty()) {
    const auto dev = bench::weight_sweep(frames, dims, cfg, o.sweep);
    std::ofstream csv(out / "weight_sweep.csv");
    csv << "scale,weight_lo,weight_hi,x1_deviation\n";
    bool decreasing = true;
    for (std::size_t i = 0; i < dev.size(); ++i) {
      csv << fmt::format("{},{},{},{:.9g}\n", o.sweep[i], o.sweep[i] * o.weight_lo, o.sweep[i] * o.weight_hi, dev[i]);
      std::cout << fmt::format("||X1 - A1||_F at [{:g}, {:g}]: {:.6g}\n", o.sweep[i] * o.weight_lo,
                               o.sweep[i] * o.weight_hi, dev[i]);
      if (i > 0 && o.sweep[i] > o.sweep[i - 1]) decreasing = decreasing && dev[i] < dev[i - 1];
    }
    std::cout << "weight monotonicity: " << (decreasing ? "ok" : "VIOLATED") << '\n';
    m.output(out / "weight_sweep.csv");
    m.result("weight_sweep", dev);
    m.result("weight_monotone", decreasing);
  }
  m.write(out);
  return all_converged ? kOk : kBudget;
}

// ---------------------------------------------------------------- replay

int dispatch(std::vector<std::string> args);

/// Rebuilds the command line from a manifest's resolved flags.
std::vector<std::string> manifest_argv(const fs::path& path, const std::string& out_override) {
  require_file(path, "manifest");
  std::ifstream in(path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  if (!doc.contains("command") || !doc.contains("flags")) throw ConfigError(path.string() + ": not a manifest");
  std::vector<std::string> args{doc["command"].get<std::string>()};
  for (const auto& [flag, value] : doc["flags"].items()) {
    if (flag == "out" && !out_override.empty()) {
      args.insert(args.end(), {"--out", out_override});
    } else if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) joined += (joined.empty() ? "" : ",") + (item.is_string() ? item.get<std::string>() : item.dump());
      args.insert(args.end(), {"--" + flag, joined});
    } else {
      args.insert(args.end(), {"--" + flag, value.is_string() ? value.get<std::string>() : value.dump()});
    }
  }
  if (!out_override.empty() && !doc["flags"].contains("out")) args.insert(args.end(), {"--out", out_override});
  return args;
}

int dispatch(std::vector<std::string> args) {
  CLI::App app{"Weighted low-rank approximation toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  SolveOptions solve_o;
  RpcaOptions rpca_o;
  VerifyOptions verify_o;
  SceneOptions scene_o;
  ScalingOptions scaling_o;
  BackgroundOptions background_o;
  std::string manifest_path;
  std::string replay_out;
  add_solve(app, solve_o);
  add_rpca(app, rpca_o);
  add_verify(app, verify_o);
  add_scene(app, scene_o);
  add_scaling(app, scaling_o);
  add_background(app, background_o);
  auto* replay = app.add_subcommand("replay", "re-run a command from its manifest.json");
  replay->add_option("--manifest", manifest_path)->required();
  replay->add_option("--out", replay_out, "write into this directory instead of the recorded one");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kError;
  }

  try {
    if (app.got_subcommand("solve")) return run_solve(solve_o);
    if (app.got_subcommand("rpca")) return run_rpca(rpca_o);
    if (app.got_subcommand("verify")) return run_verify(verify_o);
    if (app.got_subcommand("scene")) return run_scene(scene_o);
    if (app.got_subcommand("bench-scaling")) return run_scaling(scaling_o);
    if (app.got_subcommand("bench-background")) return run_background(background_o);
    if (replay->parsed()) {
      const auto replay_args = manifest_argv(manifest_path, replay_out);
      if (replay_args.front() == "replay") throw ConfigError("a manifest cannot replay another replay");
      return dispatch(replay_args);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: parse error at " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(std::move(args));
}

#include "wlra/verify.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

namespace wlra::verify {
namespace {

constexpr double kAgreementRate = 0.90;
constexpr double kMatchRate = 0.95;

std::mt19937_64 trial_rng(std::uint64_t seed, int trial, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

Matrix<double> gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Matrix<double> g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = gauss(rng);
  return g;
}

void check_sizes(Index rows, Index cols, Index k, Index r, int trials, const char* who) {
  if (trials < 0) throw ConfigError(fmt::format("{}: trials must be >= 0", who));
  if (rows < 1 || cols < 2 || rows > 30 || cols > 30) {
    throw ConfigError(fmt::format("{}: sizes must lie in [1, 30]", who));
  }
  if (k < 1 || k >= cols || r < k || r > std::min(rows, cols)) {
    throw ConfigError(fmt::format("{}: need 1 <= k < n and k <= r <= min(m, n)", who));
  }
}

std::string verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

}  // namespace

Matrix<double> gapped_matrix(Index rows, Index cols, Index rank, double min_gap, std::uint64_t seed) {
  if (rank < 1 || rank >= std::min(rows, cols)) throw ConfigError("gapped_matrix: need 1 <= rank < min(m, n)");
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const SvdFactors<double> f = svd(gaussian(rows, cols, rng));
    Vector<double> s = f.singular_values;
    s.head(rank) *= 2.0;
    if (s(rank - 1) >= min_gap * s(rank)) return f.u * s.asDiagonal() * f.vt;
  }
  throw NumericError("gapped_matrix: could not reach the requested spectral gap");
}

double max_relative_increase(const ConvergenceTrace& trace) {
  if (trace.records.empty()) return 0.0;
  const double base = 1.0 + std::abs(trace.records.front().objective);
  double worst = 0.0;
  for (std::size_t p = 1; p < trace.records.size(); ++p) {
    worst = std::max(worst, (trace.records[p].objective - trace.records[p - 1].objective) / base);
  }
  return worst;
}

double fd_gradient_norm(const PartitionedMatrix<double>& pm, const WeightMask<double>& w,
                        const SwlrState<double>& state) {
  Matrix<double> x1 = state.x1;
  Matrix<double> grad(x1.rows(), x1.cols());
  for (Index j = 0; j < x1.cols(); ++j) {
    for (Index i = 0; i < x1.rows(); ++i) {
      const double saved = x1(i, j);
      const double h = 1e-6 * (1.0 + std::abs(saved));
      x1(i, j) = saved + h;
      const double up = objective(pm, w, x1, state.c, state.d);
      x1(i, j) = saved - h;
      const double down = objective(pm, w, x1, state.c, state.d);
      x1(i, j) = saved;
      grad(i, j) = (up - down) / (2.0 * h);
    }
  }
  return grad.norm();
}

void BracketConfig::validate() const {
  check_sizes(rows, cols, k, r, trials, "verify");
  if (!(weight_lo > 0.0) || weight_hi < weight_lo) throw ConfigError("verify: need 0 < weight_lo <= weight_hi");
  swlr.validate();
  oracle.validate();
}

double BracketReport::agreement_rate() const {
  if (trials.empty()) return 1.0;
  const auto n = std::count_if(trials.begin(), trials.end(), [](const BracketTrial& t) { return t.agrees; });
  return static_cast<double>(n) / static_cast<double>(trials.size());
}

BracketReport run_bracketing(const BracketConfig& cfg) {
  cfg.validate();
  BracketReport report;
  for (int t = 0; t < cfg.trials; ++t) {
    std::mt19937_64 rng = trial_rng(cfg.seed, t, 1);
    const PartitionedMatrix<double> pm(gaussian(cfg.rows, cfg.cols, rng), cfg.k, cfg.r);
    const auto w = WeightMask<double>::uniform(cfg.rows, cfg.k, cfg.weight_lo, cfg.weight_hi, rng());
    SwlrConfig scfg = cfg.swlr;
    scfg.seed = rng();
    const SwlrSolution<double> sol = solve(pm, w, scfg);

    Matrix<double> full_w = Matrix<double>::Ones(cfg.rows, cfg.cols);
    full_w.leftCols(cfg.k) = w.w1;
    oracle::OracleConfig ocfg = cfg.oracle;
    ocfg.seed = rng();
    const auto ref = oracle::general_wlra<double>(pm.a, full_w, cfg.r, ocfg);

    BracketTrial trial;
    trial.swlr_objective = sol.trace.final_objective();
    trial.oracle_objective = ref.objective;
    trial.agrees = std::abs(trial.swlr_objective - trial.oracle_objective) <= 1e-6 * (1.0 + trial.swlr_objective);
    trial.iterations = sol.trace.iterations();
    trial.converged = sol.trace.converged();
    trial.fixed_point_gap = fixed_point_gap(pm, sol.state);
    trial.fixed_point_bound = 1e-8 * (1.0 + pm.a2().norm());
    trial.gradient_norm = fd_gradient_norm(pm, w, sol.state);
    trial.gradient_bound = 1e-6 * (1.0 + trial.swlr_objective);
    trial.max_increase = max_relative_increase(sol.trace);
    report.trials.push_back(trial);
  }
  return report;
}

void GhsCheckConfig::validate() const {
  check_sizes(rows, cols, k, r, trials, "ghs check");
  oracle.validate();
}

double GhsReport::match_rate() const {
  if (trials.empty()) return 1.0;
  const auto n = std::count_if(trials.begin(), trials.end(), [](const GhsTrial& t) { return t.matches; });
  return static_cast<double>(n) / static_cast<double>(trials.size());
}

bool GhsReport::all_dominate() const {
  return std::all_of(trials.begin(), trials.end(), [](const GhsTrial& t) { return t.dominates; });
}

GhsReport run_ghs_check(const GhsCheckConfig& cfg) {
  cfg.validate();
  GhsReport report;
  for (int t = 0; t < cfg.trials; ++t) {
    std::mt19937_64 rng = trial_rng(cfg.seed, t, 2);
    const PartitionedMatrix<double> pm(gaussian(cfg.rows, cfg.cols, rng), cfg.k, cfg.r);
    const Matrix<double> x2 = ghs_solve(pm);
    oracle::OracleConfig ocfg = cfg.oracle;
    ocfg.seed = rng();
    const auto ref = oracle::constrained_lra<double>(pm.a1(), pm.a2(), cfg.r, ocfg);

    GhsTrial trial;
    trial.closed_form = (pm.a2() - x2).squaredNorm();
    trial.oracle_objective = ref.objective;
    trial.dominates = trial.closed_form <= trial.oracle_objective + 1e-6;
    trial.matches = std::abs(trial.closed_form - trial.oracle_objective) <= 1e-6 * std::max(trial.closed_form, 1e-300);
    report.trials.push_back(trial);
  }
  return report;
}

double UnweightedReport::worst_relative_gap() const {
  double worst = 0.0;
  for (const auto& t : trials) worst = std::max(worst, t.relative_gap);
  return worst;
}

double UnweightedReport::median_iterations() const {
  if (trials.empty()) return 0.0;
  std::vector<int> its;
  for (const auto& t : trials) its.push_back(t.iterations);
  std::sort(its.begin(), its.end());
  const std::size_t mid = its.size() / 2;
  return its.size() % 2 ? its[mid] : 0.5 * (its[mid - 1] + its[mid]);
}

UnweightedReport run_unweighted(const UnweightedConfig& cfg) {
  UnweightedReport report;
  for (int t = 0; t < cfg.trials; ++t) {
    std::mt19937_64 rng = trial_rng(cfg.seed, t, 3);
    const Matrix<double> a = gapped_matrix(cfg.rows, cfg.cols, cfg.r, cfg.min_gap, rng());
    const PartitionedMatrix<double> pm(a, cfg.k, cfg.r);
    SwlrConfig scfg = cfg.swlr;
    scfg.seed = rng();
    const SwlrSolution<double> sol = solve(pm, WeightMask<double>::ones(cfg.rows, cfg.k), scfg);

    UnweightedTrial trial;
    trial.objective = sol.trace.final_objective();
    trial.eckart_young = (a - hard_threshold(a, cfg.r)).squaredNorm();
    trial.relative_gap = std::abs(trial.objective - trial.eckart_young) / trial.eckart_young;
    trial.iterations = sol.trace.iterations();
    trial.converged = sol.trace.converged();
    trial.fixed_point_gap = fixed_point_gap(pm, sol.state);
    trial.fixed_point_bound = 1e-8 * (1.0 + pm.a2().norm());
    trial.max_increase = max_relative_increase(sol.trace);
    report.trials.push_back(trial);
  }
  return report;
}

bool write_report(std::ostream& out, const BracketConfig& bcfg, const BracketReport& bracket,
                  const GhsReport& ghs) {
  out << fmt::format("verify: {} trials on {}x{} instances, k = {}, r = {}, W1 in [{}, {}], seed {}\n",
                     bracket.trials.size(), bcfg.rows, bcfg.cols, bcfg.k, bcfg.r, bcfg.weight_lo,
                     bcfg.weight_hi, bcfg.seed);
  if (bracket.trials.empty() && ghs.trials.empty()) {
    out << "warning: zero trials requested, every property passes vacuously\n";
  }
  bool all = true;
  auto line = [&](const std::string& name, bool ok, const std::string& detail) {
    all = all && ok;
    out << fmt::format("{} {:<22} {}\n", verdict(ok), name, detail);
  };

  std::size_t agree = 0, converged = 0, fp_ok = 0, grad_ok = 0;
  double worst_increase = 0.0, worst_fp = 0.0, worst_grad = 0.0;
  for (const auto& t : bracket.trials) {
    agree += t.agrees;
    worst_increase = std::max(worst_increase, t.max_increase);
    if (!t.converged) continue;
    ++converged;
    fp_ok += t.fixed_point_gap <= t.fixed_point_bound;
    grad_ok += t.gradient_norm <= t.gradient_bound;
    worst_fp = std::max(worst_fp, t.fixed_point_gap / t.fixed_point_bound);
    worst_grad = std::max(worst_grad, t.gradient_norm / t.gradient_bound);
  }
  const double rate = bracket.agreement_rate();
  line("oracle-agreement", rate >= kAgreementRate,
       fmt::format("{}/{} within 1e-6 (rate {:.3f}, required {:.2f})", agree, bracket.trials.size(), rate,
                   kAgreementRate));
  line("monotone-descent", worst_increase <= 1e-12,
       fmt::format("largest step increase {:.3e} x (1 + F0)", worst_increase));
  line("fixed-point", fp_ok == converged,
       fmt::format("{}/{} converged runs, worst gap {:.3e} of bound", fp_ok, converged, worst_fp));
  line("x1-stationarity", grad_ok == converged,
       fmt::format("{}/{} converged runs, worst gradient {:.3e} of bound", grad_ok, converged, worst_grad));

  const auto matched = std::count_if(ghs.trials.begin(), ghs.trials.end(), [](const GhsTrial& t) { return t.matches; });
  line("closed-form-dominance", ghs.all_dominate(),
       fmt::format("{}/{} at or below the ALS reference",
                   std::count_if(ghs.trials.begin(), ghs.trials.end(), [](const GhsTrial& t) { return t.dominates; }),
                   ghs.trials.size()));
  line("closed-form-match", ghs.match_rate() >= kMatchRate,
       fmt::format("{}/{} within 1e-6 relative (rate {:.3f}, required {:.2f})", matched, ghs.trials.size(),
                   ghs.match_rate(), kMatchRate));
  return all;
}

}  // namespace wlra::verify

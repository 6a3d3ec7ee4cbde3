#pragma once

// Cross-check suites on small seeded instances: sWLR against the independent
// oracles, the closed form against constrained ALS, and the unweighted
// reduction against Eckart-Young. Shared by `wlra verify` and the acceptance
// binary. Reports contain no timings, so they are byte-stable for a seed.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "wlra/oracle.hpp"
#include "wlra/swlr.hpp"

namespace wlra::verify {

/// Gaussian matrix whose top `rank` singular values are doubled, redrawn until
/// sigma_rank / sigma_{rank+1} >= min_gap.
Matrix<double> gapped_matrix(Index rows, Index cols, Index rank, double min_gap, std::uint64_t seed);

/// Largest single-step objective increase along the trace, divided by 1 + F_0.
double max_relative_increase(const ConvergenceTrace& trace);

/// Central-difference gradient of F in X1 with C and D held at the state's values.
double fd_gradient_norm(const PartitionedMatrix<double>& pm, const WeightMask<double>& w,
                        const SwlrState<double>& state);

struct BracketConfig {
  Index rows = 10;
  Index cols = 12;
  Index k = 2;
  Index r = 4;
  double weight_lo = 5.0;
  double weight_hi = 10.0;
  int trials = 20;
  SwlrConfig swlr{1e-12, 20000, 0, SwlrInit::RandomGaussian};
  oracle::OracleConfig oracle;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BracketTrial {
  double swlr_objective = 0.0;
  double oracle_objective = 0.0;
  bool agrees = false;
  int iterations = 0;
  bool converged = false;
  double fixed_point_gap = 0.0;
  double fixed_point_bound = 0.0;
  double gradient_norm = 0.0;
  double gradient_bound = 0.0;
  double max_increase = 0.0;
};

struct BracketReport {
  std::vector<BracketTrial> trials;
  double agreement_rate() const;
};

BracketReport run_bracketing(const BracketConfig& cfg);

struct GhsCheckConfig {
  Index rows = 8;
  Index cols = 10;
  Index k = 2;
  Index r = 4;
  int trials = 20;
  oracle::OracleConfig oracle;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GhsTrial {
  double closed_form = 0.0;
  double oracle_objective = 0.0;
  bool dominates = false;  ///< closed_form <= oracle + 1e-6
  bool matches = false;    ///< within 1e-6 relative
};

struct GhsReport {
  std::vector<GhsTrial> trials;
  double match_rate() const;
  bool all_dominate() const;
};

GhsReport run_ghs_check(const GhsCheckConfig& cfg);

struct UnweightedConfig {
  Index rows = 20;
  Index cols = 30;
  Index k = 3;
  Index r = 5;
  double min_gap = 1.5;
  int trials = 50;
  SwlrConfig swlr{1e-7, 20000, 0, SwlrInit::RandomGaussian};
  std::uint64_t seed = 0;
};

struct UnweightedTrial {
  double objective = 0.0;
  double eckart_young = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  double fixed_point_gap = 0.0;
  double fixed_point_bound = 0.0;
  double max_increase = 0.0;
};

struct UnweightedReport {
  std::vector<UnweightedTrial> trials;
  double worst_relative_gap() const;
  double median_iterations() const;
};

UnweightedReport run_unweighted(const UnweightedConfig& cfg);

/// Prints one line per property and returns true iff every one holds at its
/// declared rate. Zero trials pass vacuously with a warning.
bool write_report(std::ostream& out, const BracketConfig& bcfg, const BracketReport& bracket,
                  const GhsReport& ghs);

}  // namespace wlra::verify

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace wlra {

/// One solver iteration. step_norm and rel_error are NaN on the first record
/// of an sWLR run, where there is no previous iterate to compare against.
struct TraceRecord {
  int iter = 0;
  double objective = 0.0;
  double step_norm = 0.0;
  double rel_error = 0.0;
  double wall_ms = 0.0;
};

enum class StopReason { AbsoluteStep, RelativeStep, Residual, MaxIterations };

struct ConvergenceTrace {
  std::vector<TraceRecord> records;
  StopReason stop = StopReason::MaxIterations;
  int rank_recoveries = 0;
  std::vector<std::string> warnings;

  bool converged() const { return stop != StopReason::MaxIterations; }
  int iterations() const { return static_cast<int>(records.size()); }
  double final_objective() const { return records.empty() ? 0.0 : records.back().objective; }
};

/// Header `iter,objective,step_norm,rel_error,wall_ms`.
void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const ConvergenceTrace& trace);

const char* to_string(StopReason reason);

}  // namespace wlra

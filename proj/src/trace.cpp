#include "wlra/trace.hpp"

#include <fmt/format.h>

#include <fstream>
#include <ostream>

#include "wlra/errors.hpp"

namespace wlra {

void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace) {
  out << "iter,objective,step_norm,rel_error,wall_ms\n";
  for (const auto& rec : trace.records) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.6f}\n", rec.iter, rec.objective, rec.step_norm,
                       rec.rel_error, rec.wall_ms);
  }
}

void write_trace_csv(const std::filesystem::path& path, const ConvergenceTrace& trace) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_trace_csv(out, trace);
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::AbsoluteStep: return "absolute_step";
    case StopReason::RelativeStep: return "relative_step";
    case StopReason::Residual: return "residual";
    case StopReason::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

}  // namespace wlra

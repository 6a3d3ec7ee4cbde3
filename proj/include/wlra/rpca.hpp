#pragma once

// Robust PCA baselines for  min ||X||_* + lambda ||S||_1  s.t.  A = X + S.
// Both solvers stop on the feasibility residual ||A - X - S||_F / ||A||_F.

#include <chrono>
#include <cmath>
#include <optional>
#include <string>

#include "wlra/matcore.hpp"
#include "wlra/trace.hpp"

namespace wlra {

struct RpcaConfig {
  /// Weight on ||S||_1; unset means 1 / sqrt(max(m, n)).
  std::optional<double> lambda;
  /// iEALM initial penalty, applied as mu / ||A||_2.
  double mu = 1.5;
  /// iEALM penalty growth mu_{t+1} = rho * mu_t.
  double rho = 1.25;
  double epsilon = 1e-7;
  int max_iters = 1000;
  /// iEALM penalty ceiling, as a multiple of the initial penalty.
  double mu_max_factor = 1e7;
  /// APG: Lipschitz constant of the smooth coupling term.
  double apg_lipschitz = 2.0;
  /// APG continuation: smoothing shrinks by this factor each iteration ...
  double apg_eta = 0.9;
  /// ... down to this fraction of its starting value 0.99 * ||A||_2.
  double apg_mu_floor = 1e-9;
  /// Consecutive non-decreasing residuals tolerated before declaring divergence.
  int divergence_window = 20;

  double resolved_lambda(Index m, Index n) const {
    return lambda ? *lambda : 1.0 / std::sqrt(static_cast<double>(std::max(m, n)));
  }

  void validate() const {
    if (lambda && !(*lambda > 0.0)) throw PreconditionError("RpcaConfig: lambda must be positive");
    if (!(mu > 0.0)) throw PreconditionError("RpcaConfig: mu must be positive");
    if (!(rho > 1.0)) throw PreconditionError("RpcaConfig: rho must exceed 1");
    if (!(epsilon > 0.0)) throw PreconditionError("RpcaConfig: epsilon must be positive");
    if (max_iters < 1) throw PreconditionError("RpcaConfig: max_iters must be >= 1");
    if (!(apg_lipschitz > 0.0) || !(apg_eta > 0.0 && apg_eta < 1.0) || !(apg_mu_floor > 0.0)) {
      throw PreconditionError("RpcaConfig: invalid APG continuation constants");
    }
    if (divergence_window < 1) throw PreconditionError("RpcaConfig: divergence_window must be >= 1");
  }
};

template <typename Scalar>
struct RpcaResult {
  Matrix<Scalar> low_rank;  ///< X
  Matrix<Scalar> sparse;    ///< A - X
  ConvergenceTrace trace;   ///< objective = ||X||_* + lambda ||S||_1, rel_error = feasibility
};

/// Entrywise sign(x) max(|x| - tau, 0).
template <typename Derived>
Matrix<typename Derived::Scalar> soft_threshold(const Eigen::MatrixBase<Derived>& a,
                                                typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  if (tau < Scalar(0)) throw PreconditionError("soft_threshold: tau must be >= 0");
  return a.unaryExpr([tau](Scalar x) {
    const Scalar mag = std::abs(x) - tau;
    return mag > Scalar(0) ? std::copysign(mag, x) : Scalar(0);
  });
}

namespace detail {

template <typename Scalar>
struct Shrunk {
  Matrix<Scalar> value;
  Scalar nuclear = 0;
};

template <typename Derived>
Shrunk<typename Derived::Scalar> svt_with_norm(const Eigen::MatrixBase<Derived>& a,
                                               typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  const SvdFactors<Scalar> f = svd(a);
  const Vector<Scalar> shrunk = (f.singular_values.array() - tau).max(Scalar(0)).matrix();
  const Index keep = (shrunk.array() > Scalar(0)).count();
  Shrunk<Scalar> out;
  out.value = f.u.leftCols(keep) * shrunk.head(keep).asDiagonal() * f.vt.topRows(keep);
  out.nuclear = shrunk.sum();
  return out;
}

class DivergenceMonitor {
 public:
  explicit DivergenceMonitor(int window) : window_(window) {}

  void observe(double residual, int iter, const char* who) {
    if (residual >= last_) {
      if (++streak_ >= window_) {
        throw DivergenceError(std::string(who) + ": residual did not decrease for " +
                              std::to_string(window_) + " iterations (at iteration " +
                              std::to_string(iter) + ")");
      }
    } else {
      streak_ = 0;
    }
    last_ = residual;
  }

 private:
  int window_;
  int streak_ = 0;
  double last_ = std::numeric_limits<double>::infinity();
};

}  // namespace detail

/// Singular value thresholding U (Sigma - tau)_+ V^T, the proximal map of tau ||.||_*.
template <typename Derived>
Matrix<typename Derived::Scalar> svt(const Eigen::MatrixBase<Derived>& a,
                                     typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  if (tau < Scalar(0)) throw PreconditionError("svt: tau must be >= 0");
  return detail::svt_with_norm(a, tau).value;
}

/// Inexact augmented Lagrange multiplier method. Dual variable starts at
/// A / max(||A||_2, ||A||_inf / lambda); penalty mu_0 = cfg.mu / ||A||_2,
/// multiplied by rho each iteration up to mu_0 * mu_max_factor.
template <typename Derived>
RpcaResult<typename Derived::Scalar> iealm(const Eigen::MatrixBase<Derived>& a_in,
                                           const RpcaConfig& cfg) {
  using Scalar = typename Derived::Scalar;
  using Clock = std::chrono::steady_clock;
  cfg.validate();
  detail::require_finite(a_in, "iealm");
  const Matrix<Scalar> a = a_in;
  const Scalar lambda = Scalar(cfg.resolved_lambda(a.rows(), a.cols()));

  RpcaResult<Scalar> out;
  const Scalar a_norm = a.norm();
  if (a_norm == Scalar(0)) {
    out.low_rank = Matrix<Scalar>::Zero(a.rows(), a.cols());
    out.sparse = out.low_rank;
    out.trace.stop = StopReason::Residual;
    out.trace.records.push_back({0, 0.0, 0.0, 0.0, 0.0});
    return out;
  }
  const Scalar spectral = svd(a).singular_values(0);
  const Scalar inf_norm = a.cwiseAbs().maxCoeff() / lambda;
  Matrix<Scalar> dual = a / std::max(spectral, inf_norm);
  Scalar mu = Scalar(cfg.mu) / spectral;
  const Scalar mu_max = mu * Scalar(cfg.mu_max_factor);

  Matrix<Scalar> x = Matrix<Scalar>::Zero(a.rows(), a.cols());
  Matrix<Scalar> s = x;
  detail::DivergenceMonitor monitor(cfg.divergence_window);

  for (int t = 0; t < cfg.max_iters; ++t) {
    const auto start = Clock::now();
    const Matrix<Scalar> previous = x;
    s = soft_threshold(a - x + dual / mu, lambda / mu);
    auto shrunk = detail::svt_with_norm(a - s + dual / mu, Scalar(1) / mu);
    x = std::move(shrunk.value);
    const Matrix<Scalar> gap = a - x - s;
    dual += mu * gap;
    mu = std::min(mu * Scalar(cfg.rho), mu_max);

    const double residual = static_cast<double>(gap.norm() / a_norm);
    TraceRecord rec;
    rec.iter = t;
    rec.objective = static_cast<double>(shrunk.nuclear + lambda * s.cwiseAbs().sum());
    rec.step_norm = static_cast<double>((x - previous).norm());
    rec.rel_error = residual;
    rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    out.trace.records.push_back(rec);
    if (residual < cfg.epsilon) {
      out.trace.stop = StopReason::Residual;
      break;
    }
    monitor.observe(residual, t, "iealm");
  }
  out.sparse = a - x;
  out.low_rank = std::move(x);
  return out;
}

/// Accelerated proximal gradient on
///   mu ||X||_* + mu lambda ||S||_1 + 1/2 ||A - X - S||_F^2
/// with Nesterov momentum on (X, S) and continuation mu <- max(eta mu, mu_floor mu_0).
template <typename Derived>
RpcaResult<typename Derived::Scalar> apg(const Eigen::MatrixBase<Derived>& a_in,
                                         const RpcaConfig& cfg) {
  using Scalar = typename Derived::Scalar;
  using Clock = std::chrono::steady_clock;
  cfg.validate();
  detail::require_finite(a_in, "apg");
  const Matrix<Scalar> a = a_in;
  const Scalar lambda = Scalar(cfg.resolved_lambda(a.rows(), a.cols()));

  RpcaResult<Scalar> out;
  const Scalar a_norm = a.norm();
  if (a_norm == Scalar(0)) {
    out.low_rank = Matrix<Scalar>::Zero(a.rows(), a.cols());
    out.sparse = out.low_rank;
    out.trace.stop = StopReason::Residual;
    out.trace.records.push_back({0, 0.0, 0.0, 0.0, 0.0});
    return out;
  }
  const Scalar spectral = svd(a).singular_values(0);
  Scalar mu = Scalar(0.99) * spectral;
  const Scalar mu_floor = Scalar(cfg.apg_mu_floor) * spectral;
  const Scalar step = Scalar(1) / Scalar(cfg.apg_lipschitz);

  Matrix<Scalar> x = Matrix<Scalar>::Zero(a.rows(), a.cols());
  Matrix<Scalar> s = x;
  Matrix<Scalar> x_prev = x;
  Matrix<Scalar> s_prev = s;
  Scalar t_now = 1;
  Scalar t_prev = 1;
  detail::DivergenceMonitor monitor(cfg.divergence_window);

  for (int it = 0; it < cfg.max_iters; ++it) {
    const auto start = Clock::now();
    const Scalar momentum = (t_prev - Scalar(1)) / t_now;
    const Matrix<Scalar> y_x = x + momentum * (x - x_prev);
    const Matrix<Scalar> y_s = s + momentum * (s - s_prev);
    const Matrix<Scalar> grad = y_x + y_s - a;

    auto shrunk = detail::svt_with_norm(y_x - step * grad, mu * step);
    x_prev = std::move(x);
    s_prev = std::move(s);
    x = std::move(shrunk.value);
    s = soft_threshold(y_s - step * grad, lambda * mu * step);

    t_prev = t_now;
    t_now = Scalar(0.5) * (Scalar(1) + std::sqrt(Scalar(1) + Scalar(4) * t_now * t_now));
    mu = std::max(Scalar(cfg.apg_eta) * mu, mu_floor);

    const double residual = static_cast<double>((a - x - s).norm() / a_norm);
    TraceRecord rec;
    rec.iter = it;
    rec.objective = static_cast<double>(shrunk.nuclear + lambda * s.cwiseAbs().sum());
    rec.step_norm = static_cast<double>((x - x_prev).norm());
    rec.rel_error = residual;
    rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    out.trace.records.push_back(rec);
    if (residual < cfg.epsilon) {
      out.trace.stop = StopReason::Residual;
      break;
    }
    monitor.observe(residual, it, "apg");
  }
  out.sparse = a - x;
  out.low_rank = std::move(x);
  return out;
}

}  // namespace wlra

#pragma once

// Alternating solver for the specially weighted low-rank problem
//
//   min  ||(A1 - X1) .* W1||_F^2 + ||A2 - X2||_F^2   s.t. rank(X1 X2) <= r
//
// with W1 > 0 on the first k columns and unit weight elsewhere. X2 is
// parameterized as X1 C + D with rank(D) <= r - k. For fixed X1 the optimal
// (C, D) is the constrained closed form (projection onto colspace(X1) plus a
// truncated SVD of the remainder); for fixed (C, D) every row of X1 solves an
// independent k x k SPD system.

#include <chrono>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include "wlra/closedform.hpp"
#include "wlra/matcore.hpp"
#include "wlra/trace.hpp"

namespace wlra {

/// W1, m x k, strictly positive. The unit block W2 is implicit.
template <typename Scalar>
struct WeightMask {
  Matrix<Scalar> w1;

  WeightMask() = default;
  explicit WeightMask(Matrix<Scalar> w) : w1(std::move(w)) { validate(); }

  void validate() const {
    if (!w1.allFinite() || (w1.array() <= Scalar(0)).any()) {
      throw PreconditionError("WeightMask: W1 entries must be finite and strictly positive");
    }
  }

  static WeightMask ones(Index m, Index k) { return WeightMask(Matrix<Scalar>::Ones(m, k)); }

  /// i.i.d. uniform entries on [lo, hi]. The same seed with a scaled interval
  /// (s*lo, s*hi) yields the same draws scaled by s.
  static WeightMask uniform(Index m, Index k, Scalar lo, Scalar hi, std::uint64_t seed) {
    if (!(lo > Scalar(0)) || hi < lo) throw PreconditionError("WeightMask: need 0 < lo <= hi");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix<Scalar> w(m, k);
    for (Index j = 0; j < k; ++j)
      for (Index i = 0; i < m; ++i) w(i, j) = lo + (hi - lo) * Scalar(unit(rng));
    return WeightMask(std::move(w));
  }
};

enum class SwlrInit { RandomGaussian, FromA1 };

struct SwlrConfig {
  double epsilon = 1e-7;
  int max_iters = 100;
  std::uint64_t seed = 0;
  SwlrInit init = SwlrInit::RandomGaussian;

  void validate() const {
    if (!(epsilon > 0.0)) throw PreconditionError("SwlrConfig: epsilon must be positive");
    if (max_iters < 1) throw PreconditionError("SwlrConfig: max_iters must be >= 1");
  }
};

template <typename Scalar>
struct SwlrState {
  Matrix<Scalar> x1;  ///< m x k
  Matrix<Scalar> c;   ///< k x (n - k)
  Matrix<Scalar> d;   ///< m x (n - k), rank <= r - k
  Index iteration = 0;

  Matrix<Scalar> x2() const { return x1 * c + d; }

  /// X = (X1, X1 C + D).
  Matrix<Scalar> assemble() const {
    Matrix<Scalar> x(x1.rows(), x1.cols() + c.cols());
    x.leftCols(x1.cols()) = x1;
    x.rightCols(c.cols()) = x2();
    return x;
  }
};

template <typename Scalar>
struct CdStep {
  Matrix<Scalar> c;
  Matrix<Scalar> d;
};

template <typename Scalar>
struct SwlrSolution {
  SwlrState<Scalar> state;
  ConvergenceTrace trace;
};

namespace detail {

template <typename Scalar>
void check_swlr_shapes(const PartitionedMatrix<Scalar>& pm, const WeightMask<Scalar>& w) {
  if (w.w1.rows() != pm.rows() || w.w1.cols() != pm.k) {
    throw DimensionError("sWLR: W1 must be " + std::to_string(pm.rows()) + "x" +
                         std::to_string(pm.k));
  }
}

}  // namespace detail

/// F(X1, C, D) = ||(A1 - X1) .* W1||^2 + ||A2 - X1 C - D||^2.
template <typename Scalar>
Scalar objective(const PartitionedMatrix<Scalar>& pm, const WeightMask<Scalar>& w,
                 const Matrix<Scalar>& x1, const Matrix<Scalar>& c, const Matrix<Scalar>& d) {
  detail::check_swlr_shapes(pm, w);
  const Index rest = pm.cols() - pm.k;
  if (x1.rows() != pm.rows() || x1.cols() != pm.k || c.rows() != pm.k || c.cols() != rest ||
      d.rows() != pm.rows() || d.cols() != rest) {
    throw DimensionError("sWLR objective: iterate shapes do not match the partition");
  }
  const Scalar weighted = ((pm.a1() - x1).cwiseProduct(w.w1)).squaredNorm();
  const Scalar plain = (pm.a2() - x1 * c - d).squaredNorm();
  return weighted + plain;
}

template <typename Scalar>
Scalar objective(const PartitionedMatrix<Scalar>& pm, const WeightMask<Scalar>& w,
                 const SwlrState<Scalar>& s) {
  return objective(pm, w, s.x1, s.c, s.d);
}

/// Optimal (C, D) for fixed X1: C = R^{-1} Q^T A2 and D = H_{r-k}((I - QQ^T) A2)
/// from the QR of X1. Requires r >= k; r = k gives D = 0. Throws
/// RankDeficientError when X1 is numerically column-rank-deficient.
template <typename Scalar>
CdStep<Scalar> solve_cd_given_x1(const PartitionedMatrix<Scalar>& pm, const Matrix<Scalar>& x1) {
  if (x1.rows() != pm.rows() || x1.cols() != pm.k) {
    throw DimensionError("solve_cd_given_x1: X1 must be m x k");
  }
  if (pm.r < pm.k) throw PreconditionError("solve_cd_given_x1: requires r >= k");
  const QrFactors<Scalar> f = qr(x1);
  const Matrix<Scalar> a2 = pm.a2();
  const Matrix<Scalar> coords = f.q.transpose() * a2;
  CdStep<Scalar> step;
  step.c = f.r.template triangularView<Eigen::Upper>().solve(coords);
  const Matrix<Scalar> outside = a2 - f.q * coords;
  step.d = hard_threshold(outside, pm.r - pm.k);
  return step;
}

/// Unique minimizer of F(., C, D). Row i solves
///   X1(i,:) (diag(W1(i,:)^2) + C C^T) = E(i,:),  E = A1 .* W1 .* W1 + (A2 - D) C^T.
/// Rows are independent given (C, D), so the update order is irrelevant.
template <typename Scalar>
Matrix<Scalar> update_x1(const PartitionedMatrix<Scalar>& pm, const WeightMask<Scalar>& w,
                         const Matrix<Scalar>& c, const Matrix<Scalar>& d) {
  detail::check_swlr_shapes(pm, w);
  w.validate();
  const Index m = pm.rows();
  const Index k = pm.k;
  if (c.rows() != k || c.cols() != pm.cols() - k || d.rows() != m || d.cols() != c.cols()) {
    throw DimensionError("update_x1: C or D shape does not match the partition");
  }
  const Matrix<Scalar> w_sq = w.w1.cwiseAbs2();
  const Matrix<Scalar> rhs = pm.a1().cwiseProduct(w_sq) + (pm.a2() - d) * c.transpose();
  const Matrix<Scalar> gram = c * c.transpose();

  Matrix<Scalar> x1(m, k);
  Matrix<Scalar> system(k, k);
  Eigen::LLT<Matrix<Scalar>> llt(k);
  for (Index i = 0; i < m; ++i) {
    system = gram;
    system.diagonal() += w_sq.row(i).transpose();
    llt.compute(system);
    if (llt.info() == Eigen::Success) {
      x1.row(i) = llt.solve(rhs.row(i).transpose()).transpose();
      continue;
    }
    // Rounding broke definiteness (huge C): solve the same row as the stacked
    // least-squares problem [diag(w); C^T] x = [w .* a1; (A2 - D)^T] instead.
    Matrix<Scalar> stacked(k + c.cols(), k);
    stacked.topRows(k) = w.w1.row(i).asDiagonal();
    stacked.bottomRows(c.cols()) = c.transpose();
    Vector<Scalar> target(k + c.cols());
    target.head(k) = w.w1.row(i).cwiseProduct(pm.a1().row(i)).transpose();
    target.tail(c.cols()) = (pm.a2().row(i) - d.row(i)).transpose();
    Eigen::HouseholderQR<Matrix<Scalar>> ls(stacked);
    x1.row(i) = ls.solve(target).transpose();
    if (!x1.row(i).allFinite()) {
      throw NumericError("update_x1: row system could not be solved at row " + std::to_string(i));
    }
  }
  return x1;
}

/// Fixed-point gap ||X2 - [P_X1(A2) + H_{r-k}(P_perp_X1(A2))]||_F,
/// evaluated through ghs_solve with X1 in place of A1.
template <typename Scalar>
Scalar fixed_point_gap(const PartitionedMatrix<Scalar>& pm, const SwlrState<Scalar>& s) {
  Matrix<Scalar> stacked(pm.rows(), pm.cols());
  stacked.leftCols(pm.k) = s.x1;
  stacked.rightCols(pm.cols() - pm.k) = pm.a2();
  const Matrix<Scalar> best = ghs_solve(PartitionedMatrix<Scalar>(std::move(stacked), pm.k, pm.r));
  return (s.x2() - best).norm();
}

namespace detail {

template <typename Scalar>
Matrix<Scalar> initial_x1(const PartitionedMatrix<Scalar>& pm, const SwlrConfig& cfg,
                          std::mt19937_64& rng) {
  if (cfg.init == SwlrInit::FromA1) return pm.a1();
  std::normal_distribution<double> gauss;
  Matrix<Scalar> x1(pm.rows(), pm.k);
  for (Index j = 0; j < x1.cols(); ++j)
    for (Index i = 0; i < x1.rows(); ++i) x1(i, j) = Scalar(gauss(rng));
  return x1;
}

// Nudge the reported columns by Gaussian noise of norm 1e-10 * ||X1||_F
// (1e-10 absolute for a zero iterate).
template <typename Scalar>
void perturb_columns(Matrix<Scalar>& x1, const std::vector<std::ptrdiff_t>& columns,
                     std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  const Scalar magnitude = Scalar(1e-10) * std::max(x1.norm(), Scalar(1));
  for (const auto col : columns) {
    Vector<Scalar> noise(x1.rows());
    for (Index i = 0; i < noise.size(); ++i) noise(i) = Scalar(gauss(rng));
    x1.col(col) += magnitude * noise / noise.norm();
  }
}

}  // namespace detail

/// Runs the alternating scheme until ||X_{p+1} - X_p||_F < eps, or that step
/// relative to ||X_p||_F is below eps, or max_iters CD steps were taken. The
/// returned state always ends on a (C, D) step, so it satisfies the
/// fixed-point identity for its own X1.
template <typename Scalar>
SwlrSolution<Scalar> solve(const PartitionedMatrix<Scalar>& pm, const WeightMask<Scalar>& w,
                           const SwlrConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  pm.validate();
  w.validate();
  cfg.validate();
  detail::check_swlr_shapes(pm, w);
  if (pm.k < 1) throw PreconditionError("sWLR: requires k >= 1 (use pca_truncate for k = 0)");
  if (pm.r < pm.k) throw PreconditionError("sWLR: requires r >= k");

  SwlrSolution<Scalar> out;
  ConvergenceTrace& trace = out.trace;
  if (pm.r == pm.k) {
    trace.warnings.emplace_back("r == k: D is identically zero; the alternating scheme assumes r > k");
  }

  std::mt19937_64 rng(cfg.seed);
  Matrix<Scalar> x1 = detail::initial_x1(pm, cfg, rng);
  Matrix<Scalar> previous;

  for (int p = 0;; ++p) {
    const auto start = Clock::now();
    CdStep<Scalar> cd;
    try {
      cd = solve_cd_given_x1(pm, x1);
    } catch (const RankDeficientError& first) {
      ++trace.rank_recoveries;
      detail::perturb_columns(x1, first.indices(), rng);
      try {
        cd = solve_cd_given_x1(pm, x1);
      } catch (const RankDeficientError& second) {
        throw NumericError("sWLR: iterate X1 stays rank-deficient after perturbation (iteration " +
                           std::to_string(p) + ", column " + std::to_string(second.index()) + ")");
      }
    }

    SwlrState<Scalar>& state = out.state;
    state.x1 = x1;
    state.c = std::move(cd.c);
    state.d = std::move(cd.d);
    state.iteration = p;
    Matrix<Scalar> current = state.assemble();

    TraceRecord rec;
    rec.iter = p;
    rec.objective = static_cast<double>(objective(pm, w, state));
    rec.step_norm = std::numeric_limits<double>::quiet_NaN();
    rec.rel_error = std::numeric_limits<double>::quiet_NaN();
    bool done = false;
    if (p > 0) {
      const double step = static_cast<double>((current - previous).norm());
      const double base = static_cast<double>(previous.norm());
      rec.step_norm = step;
      rec.rel_error = base > 0.0 ? step / base : std::numeric_limits<double>::infinity();
      if (step < cfg.epsilon) {
        trace.stop = StopReason::AbsoluteStep;
        done = true;
      } else if (rec.rel_error < cfg.epsilon) {
        trace.stop = StopReason::RelativeStep;
        done = true;
      }
    }
    if (!done && p + 1 >= cfg.max_iters) {
      trace.stop = StopReason::MaxIterations;
      done = true;
    }
    if (!done) x1 = update_x1(pm, w, state.c, state.d);
    rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    trace.records.push_back(rec);
    if (done) break;
    previous = std::move(current);
  }
  return out;
}

}  // namespace wlra

#pragma once

// Slow, independent reference solvers for small instances. They use a
// factored parameterization (X = G H^T) and plain alternating least squares,
// so agreement with the closed forms and with sWLR is evidence rather than a
// restatement of the same computation.

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "wlra/matcore.hpp"

namespace wlra::oracle {

struct OracleConfig {
  int restarts = 10;
  int inner_iters = 5000;
  /// Stop a start once the objective decrease falls below tol * (1 + objective).
  double tol = 1e-15;
  std::uint64_t seed = 0;

  void validate() const {
    if (restarts < 1 || inner_iters < 1 || !(tol > 0.0)) {
      throw PreconditionError("OracleConfig: restarts, inner_iters and tol must be positive");
    }
  }
};

template <typename Scalar>
struct OracleResult {
  Matrix<Scalar> x;
  Scalar objective = 0;
  bool ridge_used = false;  ///< a singular row/column system needed the 1e-12 ridge
  int best_start = 0;
  std::vector<std::vector<double>> histories;  ///< objective per sweep, one vector per start
};

template <typename Scalar>
struct ConstrainedOracleResult {
  Matrix<Scalar> x2;
  Scalar objective = 0;
  int best_start = 0;
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Matrix<Scalar> g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = Scalar(gauss(rng));
  return g;
}

// Solves the small SPD system, adding a 1e-12 ridge if the factorization fails.
template <typename Scalar>
Vector<Scalar> spd_solve(Matrix<Scalar> system, const Vector<Scalar>& rhs, bool& ridged) {
  Eigen::LLT<Matrix<Scalar>> llt(system);
  if (llt.info() != Eigen::Success) {
    ridged = true;
    const Scalar scale = std::max(Scalar(1), system.diagonal().cwiseAbs().maxCoeff());
    system.diagonal().array() += Scalar(1e-12) * scale;
    llt.compute(system);
    if (llt.info() != Eigen::Success) throw NumericError("oracle: ridge-regularized solve failed");
  }
  return llt.solve(rhs);
}

template <typename Scalar>
Scalar weighted_sq(const Matrix<Scalar>& a, const Matrix<Scalar>& w_sq, const Matrix<Scalar>& x) {
  return ((a - x).cwiseAbs2().cwiseProduct(w_sq)).sum();
}

}  // namespace detail

/// General weighted low-rank approximation
///   min ||(A - X) .* W||_F^2,  rank(X) <= r
/// by alternating exact weighted least squares over the rows of G and H in
/// X = G H^T, best of `restarts` Gaussian starts.
template <typename Scalar>
OracleResult<Scalar> general_wlra(const Matrix<Scalar>& a, const Matrix<Scalar>& w, Index r,
                                  const OracleConfig& cfg) {
  cfg.validate();
  if (a.rows() != w.rows() || a.cols() != w.cols()) throw DimensionError("general_wlra: W shape");
  if ((w.array() < Scalar(0)).any()) throw PreconditionError("general_wlra: W must be >= 0");
  if (r < 0 || r > std::min(a.rows(), a.cols())) throw PreconditionError("general_wlra: bad rank");
  const Index m = a.rows();
  const Index n = a.cols();
  const Matrix<Scalar> w_sq = w.cwiseAbs2();

  OracleResult<Scalar> best;
  best.objective = std::numeric_limits<Scalar>::infinity();
  if (r == 0) {
    best.x = Matrix<Scalar>::Zero(m, n);
    best.objective = detail::weighted_sq(a, w_sq, best.x);
    return best;
  }

  std::mt19937_64 rng(cfg.seed);
  for (int start = 0; start < cfg.restarts; ++start) {
    Matrix<Scalar> g(m, r);
    Matrix<Scalar> h = detail::gaussian<Scalar>(n, r, rng);
    bool ridged = false;
    std::vector<double> history;
    Scalar previous = std::numeric_limits<Scalar>::infinity();
    for (int it = 0; it < cfg.inner_iters; ++it) {
      for (Index i = 0; i < m; ++i) {
        const Vector<Scalar> wi = w_sq.row(i).transpose();
        const Matrix<Scalar> system = h.transpose() * wi.asDiagonal() * h;
        const Vector<Scalar> rhs = h.transpose() * wi.cwiseProduct(a.row(i).transpose());
        g.row(i) = detail::spd_solve(system, rhs, ridged).transpose();
      }
      for (Index j = 0; j < n; ++j) {
        const Vector<Scalar> wj = w_sq.col(j);
        const Matrix<Scalar> system = g.transpose() * wj.asDiagonal() * g;
        const Vector<Scalar> rhs = g.transpose() * wj.cwiseProduct(a.col(j));
        h.row(j) = detail::spd_solve(system, rhs, ridged).transpose();
      }
      const Scalar obj = detail::weighted_sq(a, w_sq, Matrix<Scalar>(g * h.transpose()));
      history.push_back(static_cast<double>(obj));
      const bool stalled = previous - obj <= Scalar(cfg.tol) * (Scalar(1) + obj);
      previous = obj;
      if (stalled) break;
    }
    best.histories.push_back(std::move(history));
    best.ridge_used = best.ridge_used || ridged;
    if (previous < best.objective) {
      best.objective = previous;
      best.x = g * h.transpose();
      best.best_start = start;
    }
  }
  return best;
}

/// Reference for the constrained problem: min ||A2 - A1 C - G H^T||_F with
/// G H^T of rank r - rank(A1), by alternating least squares over C, G, H.
template <typename Scalar>
ConstrainedOracleResult<Scalar> constrained_lra(const Matrix<Scalar>& a1, const Matrix<Scalar>& a2,
                                                Index r, const OracleConfig& cfg) {
  cfg.validate();
  if (a1.rows() != a2.rows()) throw DimensionError("constrained_lra: row mismatch");
  Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>> a1_ls;
  a1_ls.setThreshold(Scalar(kRankTolerance));
  a1_ls.compute(a1);
  const Index k_eff = a1.cols() == 0 ? 0 : a1_ls.rank();
  if (r < k_eff) throw PreconditionError("constrained_lra: r below rank(A1)");
  const Index d_rank = std::min(r - k_eff, std::min(a2.rows(), a2.cols()));

  auto fit_c = [&](const Matrix<Scalar>& target) -> Matrix<Scalar> {
    if (a1.cols() == 0) return Matrix<Scalar>::Zero(0, a2.cols());
    return a1_ls.solve(target);
  };
  auto lift = [&](const Matrix<Scalar>& c) -> Matrix<Scalar> {
    if (a1.cols() == 0) return Matrix<Scalar>::Zero(a2.rows(), a2.cols());
    return a1 * c;
  };

  ConstrainedOracleResult<Scalar> best;
  best.objective = std::numeric_limits<Scalar>::infinity();
  if (d_rank == 0) {
    best.x2 = lift(fit_c(a2));
    best.objective = (a2 - best.x2).squaredNorm();
    return best;
  }

  std::mt19937_64 rng(cfg.seed);
  bool ridged = false;
  for (int start = 0; start < cfg.restarts; ++start) {
    Matrix<Scalar> g = detail::gaussian<Scalar>(a2.rows(), d_rank, rng);
    Matrix<Scalar> h = detail::gaussian<Scalar>(a2.cols(), d_rank, rng);
    Matrix<Scalar> c;
    Scalar previous = std::numeric_limits<Scalar>::infinity();
    for (int it = 0; it < cfg.inner_iters; ++it) {
      c = fit_c(a2 - g * h.transpose());
      const Matrix<Scalar> rest = a2 - lift(c);
      // G and H updates are ordinary least squares; reuse the SPD helper column-wise.
      const Matrix<Scalar> hh = h.transpose() * h;
      const Matrix<Scalar> rh = rest * h;
      for (Index i = 0; i < g.rows(); ++i) {
        g.row(i) = detail::spd_solve(hh, Vector<Scalar>(rh.row(i).transpose()), ridged).transpose();
      }
      const Matrix<Scalar> gg = g.transpose() * g;
      const Matrix<Scalar> rg = rest.transpose() * g;
      for (Index j = 0; j < h.rows(); ++j) {
        h.row(j) = detail::spd_solve(gg, Vector<Scalar>(rg.row(j).transpose()), ridged).transpose();
      }
      const Scalar obj = (rest - g * h.transpose()).squaredNorm();
      const bool stalled = previous - obj <= Scalar(cfg.tol) * (Scalar(1) + obj);
      previous = obj;
      if (stalled) break;
    }
    const Matrix<Scalar> x2 = lift(fit_c(a2 - g * h.transpose())) + g * h.transpose();
    const Scalar obj = (a2 - x2).squaredNorm();
    if (obj < best.objective) {
      best.objective = obj;
      best.x2 = x2;
      best.best_start = start;
    }
  }
  return best;
}

/// Smallest weighted objective ||(A - Y) .* W||_F^2 over `samples` rank-r
/// candidates Y: the zero matrix first, then alternately the projection of A
/// onto the range of a Gaussian sketch A*Omega and a Gaussian G H^T, each
/// rescaled by its optimal scalar. Any solver should land at or below it.
template <typename Scalar>
Scalar random_candidate_bound(const Matrix<Scalar>& a, const Matrix<Scalar>& w, Index r,
                              int samples, std::uint64_t seed) {
  if (samples < 1) throw PreconditionError("random_candidate_bound: samples must be >= 1");
  if (a.rows() != w.rows() || a.cols() != w.cols()) throw DimensionError("random_candidate_bound");
  const Matrix<Scalar> w_sq = w.cwiseAbs2();
  const Matrix<Scalar> zero = Matrix<Scalar>::Zero(a.rows(), a.cols());
  Scalar best = detail::weighted_sq(a, w_sq, zero);
  if (r <= 0) return best;

  std::mt19937_64 rng(seed);
  for (int s = 1; s < samples; ++s) {
    Matrix<Scalar> y;
    if (s % 2 == 1) {
      const Matrix<Scalar> sketch = a * detail::gaussian<Scalar>(a.cols(), r, rng);
      Eigen::HouseholderQR<Matrix<Scalar>> dec(sketch);
      const Matrix<Scalar> q = dec.householderQ() * Matrix<Scalar>::Identity(a.rows(), r);
      y = q * (q.transpose() * a);
    } else {
      y = detail::gaussian<Scalar>(a.rows(), r, rng) *
          detail::gaussian<Scalar>(a.cols(), r, rng).transpose();
    }
    const Scalar denom = (y.cwiseAbs2().cwiseProduct(w_sq)).sum();
    if (!(denom > Scalar(0))) continue;
    const Scalar scale = (a.cwiseProduct(y).cwiseProduct(w_sq)).sum() / denom;
    best = std::min(best, detail::weighted_sq(a, w_sq, Matrix<Scalar>(scale * y)));
  }
  return best;
}

}  // namespace wlra::oracle

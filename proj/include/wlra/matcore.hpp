#pragma once

// Dense kernels shared by every solver: SVD/QR with explicit failure modes,
// Eckart-Young truncation, and orthogonal projectors.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "wlra/errors.hpp"

namespace wlra {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Singular values below kRankTolerance * sigma_max, and QR pivots below
/// kRankTolerance * ||A||_F, count as zero.
inline constexpr double kRankTolerance = 1e-12;

template <typename Scalar>
struct SvdFactors {
  Matrix<Scalar> u;                ///< m x s, orthonormal columns
  Vector<Scalar> singular_values;  ///< nonincreasing, >= 0
  Matrix<Scalar> vt;               ///< s x n, orthonormal rows

  Index size() const { return singular_values.size(); }

  Matrix<Scalar> reconstruct() const { return u * singular_values.asDiagonal() * vt; }

  Index numerical_rank() const {
    if (singular_values.size() == 0 || singular_values(0) == Scalar(0)) return 0;
    const Scalar cutoff = Scalar(kRankTolerance) * singular_values(0);
    return (singular_values.array() > cutoff).count();
  }
};

template <typename Scalar>
struct QrFactors {
  Matrix<Scalar> q;  ///< m x k, orthonormal columns
  Matrix<Scalar> r;  ///< k x k, upper triangular with nonnegative diagonal
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& a, const char* who) {
  if (!a.allFinite()) throw PreconditionError(std::string(who) + ": input has non-finite entries");
}

template <typename A, typename B>
void require_same_shape(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b,
                        const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(who) + ": shape mismatch " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                         "x" + std::to_string(b.cols()));
  }
}

// Lanczos pays off only when few triplets are wanted from a large matrix.
inline bool prefer_krylov(Index smaller_dim, Index rank) {
  return smaller_dim >= 40 && rank * 8 <= smaller_dim;
}

// Top-`rank` singular triplets by Golub-Kahan-Lanczos bidiagonalization with
// full reorthogonalization. Runs until every wanted Ritz triplet has residual
// ||A^T u - sigma v|| <= tol * sigma_1. Returns nullopt on breakdown or when
// the step cap is hit; callers fall back to the dense SVD.
template <typename Scalar>
std::optional<SvdFactors<Scalar>> lanczos_top_svd(const Matrix<Scalar>& a, Index rank) {
  const Index m = a.rows();
  const Index n = a.cols();
  const Index smaller = std::min(m, n);
  const Index cap = std::min(smaller, std::max<Index>(6 * rank + 60, 80));
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const Scalar tol = std::max(Scalar(1e-12), Scalar(100) * eps);
  const Scalar scale = a.norm();
  if (scale == Scalar(0)) return std::nullopt;
  const Scalar breakdown = Scalar(10) * eps * scale;

  Matrix<Scalar> left(m, cap);
  Matrix<Scalar> right(n, cap + 1);
  Vector<Scalar> alpha(cap);
  Vector<Scalar> beta(cap);

  // Fixed seed: the start vector is part of the deterministic kernel.
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss;
  Vector<Scalar> v(n);
  for (Index i = 0; i < n; ++i) v(i) = Scalar(gauss(rng));
  right.col(0) = v / v.norm();

  Vector<Scalar> u(m);
  Index last_check = 0;
  for (Index j = 0; j < cap; ++j) {
    u.noalias() = a * right.col(j);
    if (j > 0) u -= beta(j - 1) * left.col(j - 1);
    for (int pass = 0; pass < 2; ++pass) {
      u -= left.leftCols(j) * (left.leftCols(j).transpose() * u);
    }
    alpha(j) = u.norm();
    if (alpha(j) <= breakdown) return std::nullopt;
    left.col(j) = u / alpha(j);

    v.noalias() = a.transpose() * left.col(j);
    v -= alpha(j) * right.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      v -= right.leftCols(j + 1) * (right.leftCols(j + 1).transpose() * v);
    }
    beta(j) = v.norm();
    const Index steps = j + 1;
    if (beta(j) <= breakdown) return std::nullopt;
    right.col(j + 1) = v / beta(j);

    const bool check = (steps >= rank + 10 && steps - last_check >= 5) || steps == cap;
    if (!check) continue;
    last_check = steps;

    Matrix<Scalar> bidiag = Matrix<Scalar>::Zero(steps, steps);
    bidiag.diagonal() = alpha.head(steps);
    if (steps > 1) bidiag.diagonal(1) = beta.head(steps - 1);
    Eigen::JacobiSVD<Matrix<Scalar>> small(bidiag, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (small.info() != Eigen::Success) return std::nullopt;
    const auto& sigma = small.singularValues();
    bool converged = true;
    for (Index i = 0; i < rank && converged; ++i) {
      converged = beta(j) * std::abs(small.matrixU()(steps - 1, i)) <= tol * sigma(0);
    }
    if (!converged) continue;

    SvdFactors<Scalar> f;
    f.u = left.leftCols(steps) * small.matrixU().leftCols(rank);
    f.singular_values = sigma.head(rank);
    f.vt = (right.leftCols(steps) * small.matrixV().leftCols(rank)).transpose();
    return f;
  }
  return std::nullopt;
}

// Top-`rank` triplets of a small matrix from the eigenvectors of its smaller
// Gram matrix, sharpened by one half power step and a Rayleigh-Ritz SVD.
// Squaring the spectrum is only safe when sigma_rank is not tiny next to
// sigma_1 and the eigenvalue gap at the cut is wide; otherwise nullopt.
template <typename Scalar>
std::optional<SvdFactors<Scalar>> gram_top_svd(const Matrix<Scalar>& a, Index rank) {
  const bool wide = a.cols() > a.rows();
  const Matrix<Scalar> b = wide ? Matrix<Scalar>(a.transpose()) : a;
  const Index c = b.cols();
  if (rank < 1 || rank >= c) return std::nullopt;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(b.transpose() * b);
  if (eig.info() != Eigen::Success) return std::nullopt;
  const auto& lambda = eig.eigenvalues();  // ascending
  const Scalar top = lambda(c - 1);
  const Scalar at = lambda(c - rank);
  const Scalar below = std::max(lambda(c - rank - 1), Scalar(0));
  if (!(top > Scalar(0)) || at < Scalar(1e-8) * top || at - below < Scalar(1e-4) * top) {
    return std::nullopt;
  }

  Eigen::HouseholderQR<Matrix<Scalar>> basis(b * eig.eigenvectors().rightCols(rank));
  const Matrix<Scalar> q = basis.householderQ() * Matrix<Scalar>::Identity(b.rows(), rank);
  const Matrix<Scalar> ritz = q.transpose() * b;
  Eigen::JacobiSVD<Matrix<Scalar>> small(ritz, Eigen::ComputeFullU | Eigen::ComputeThinV);
  if (small.info() != Eigen::Success) return std::nullopt;

  SvdFactors<Scalar> f;
  f.singular_values = small.singularValues();
  const Matrix<Scalar> left = q * small.matrixU();
  if (wide) {
    f.u = small.matrixV();
    f.vt = left.transpose();
  } else {
    f.u = left;
    f.vt = small.matrixV().transpose();
  }
  return f;
}

}  // namespace detail

/// Thin SVD, s = min(rows, cols). Throws NumericError if the underlying
/// solver reports anything but success.
template <typename Derived>
SvdFactors<typename Derived::Scalar> svd(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  detail::require_finite(a, "svd");
  SvdFactors<Scalar> f;
  if (a.rows() == 0 || a.cols() == 0) {
    f.u.resize(a.rows(), 0);
    f.singular_values.resize(0);
    f.vt.resize(0, a.cols());
    return f;
  }
  Eigen::BDCSVD<Matrix<Scalar>> dec(a.derived(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) throw NumericError("svd: solver did not converge");
  f.u = dec.matrixU();
  f.singular_values = dec.singularValues();
  f.vt = dec.matrixV().transpose();
  return f;
}

/// Leading `rank` singular triplets (rank <= min(rows, cols)). Large inputs
/// with a small rank go through a converged Lanczos bidiagonalization, small
/// ones with a clear gap at the cut through the Gram eigenproblem, the rest
/// through the dense SVD.
template <typename Derived>
SvdFactors<typename Derived::Scalar> truncated_svd(const Eigen::MatrixBase<Derived>& a,
                                                   Index rank) {
  using Scalar = typename Derived::Scalar;
  const Index smaller = std::min(a.rows(), a.cols());
  if (rank < 0 || rank > smaller) throw PreconditionError("truncated_svd: rank out of range");
  detail::require_finite(a, "truncated_svd");
  if (rank > 0 && detail::prefer_krylov(smaller, rank)) {
    Matrix<Scalar> dense = a;
    if (auto f = detail::lanczos_top_svd<Scalar>(dense, rank)) return std::move(*f);
  } else if (rank > 0 && rank < smaller) {
    if (auto f = detail::gram_top_svd<Scalar>(Matrix<Scalar>(a), rank)) return std::move(*f);
  }
  SvdFactors<Scalar> full = svd(a);
  SvdFactors<Scalar> f;
  f.u = full.u.leftCols(rank);
  f.singular_values = full.singular_values.head(rank);
  f.vt = full.vt.topRows(rank);
  return f;
}

/// Thin Householder QR of a tall matrix, signs fixed so diag(r) >= 0.
/// Throws RankDeficientError listing every column whose pivot falls below
/// kRankTolerance * ||a||_F.
template <typename Derived>
QrFactors<typename Derived::Scalar> qr(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  detail::require_finite(a, "qr");
  if (a.rows() < a.cols()) throw PreconditionError("qr: requires rows >= cols");
  const Index m = a.rows();
  const Index k = a.cols();
  Eigen::HouseholderQR<Matrix<Scalar>> dec(a.derived());
  QrFactors<Scalar> f;
  f.q = dec.householderQ() * Matrix<Scalar>::Identity(m, k);
  f.r = dec.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  for (Index i = 0; i < k; ++i) {
    if (f.r(i, i) < Scalar(0)) {
      f.r.row(i) *= Scalar(-1);
      f.q.col(i) *= Scalar(-1);
    }
  }
  const Scalar tol = Scalar(kRankTolerance) * a.norm();
  std::vector<std::ptrdiff_t> deficient;
  for (Index i = 0; i < k; ++i) {
    if (f.r(i, i) == Scalar(0) || f.r(i, i) < tol) deficient.push_back(i);
  }
  if (!deficient.empty()) throw RankDeficientError(std::move(deficient));
  return f;
}

/// Number of singular values above kRankTolerance * sigma_max.
template <typename Derived>
Index numerical_rank(const Eigen::MatrixBase<Derived>& a) {
  return svd(a).numerical_rank();
}

/// H_r(A): best approximation of rank <= `rank` in the Frobenius norm.
/// rank = 0 gives the zero matrix; rank >= min(m, n) gives A back.
/// With a tie at the cut, the first `rank` triplets in factorization order win.
template <typename Derived>
Matrix<typename Derived::Scalar> hard_threshold(const Eigen::MatrixBase<Derived>& a, Index rank) {
  using Scalar = typename Derived::Scalar;
  if (rank < 0) throw PreconditionError("hard_threshold: negative rank");
  detail::require_finite(a, "hard_threshold");
  if (rank == 0) return Matrix<Scalar>::Zero(a.rows(), a.cols());
  if (rank >= std::min(a.rows(), a.cols())) return a;
  const SvdFactors<Scalar> f = truncated_svd(a, rank);
  return f.reconstruct();
}

/// Q Q^T b for Q with orthonormal columns.
template <typename DerivedQ, typename DerivedB>
Matrix<typename DerivedB::Scalar> project_onto_colspace(const Eigen::MatrixBase<DerivedQ>& basis_q,
                                                        const Eigen::MatrixBase<DerivedB>& b) {
  if (basis_q.rows() != b.rows()) throw DimensionError("project_onto_colspace: row mismatch");
  return basis_q * (basis_q.transpose() * b);
}

/// b - Q Q^T b.
template <typename DerivedQ, typename DerivedB>
Matrix<typename DerivedB::Scalar> project_onto_complement(
    const Eigen::MatrixBase<DerivedQ>& basis_q, const Eigen::MatrixBase<DerivedB>& b) {
  if (basis_q.rows() != b.rows()) throw DimensionError("project_onto_complement: row mismatch");
  return b - basis_q * (basis_q.transpose() * b);
}

template <typename Derived>
typename Derived::Scalar frobenius_norm(const Eigen::MatrixBase<Derived>& a) {
  return a.norm();
}

template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> hadamard(const Eigen::MatrixBase<DerivedA>& a,
                                           const Eigen::MatrixBase<DerivedB>& b) {
  detail::require_same_shape(a, b, "hadamard");
  return a.cwiseProduct(b);
}

template <typename Derived>
typename Derived::Scalar nuclear_norm(const Eigen::MatrixBase<Derived>& a) {
  return svd(a).singular_values.sum();
}

}  // namespace wlra

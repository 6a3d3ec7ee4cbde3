#pragma once

#include "wlra/matcore.hpp"

namespace wlra {

/// A = (A1 A2) with A1 the first k columns, plus the target rank r.
template <typename Scalar>
struct PartitionedMatrix {
  Matrix<Scalar> a;
  Index k = 0;
  Index r = 0;

  PartitionedMatrix() = default;
  PartitionedMatrix(Matrix<Scalar> a_in, Index k_in, Index r_in)
      : a(std::move(a_in)), k(k_in), r(r_in) {
    validate();
  }

  Index rows() const { return a.rows(); }
  Index cols() const { return a.cols(); }
  auto a1() const { return a.leftCols(k); }
  auto a2() const { return a.rightCols(a.cols() - k); }

  void validate() const {
    if (a.rows() <= 0 || a.cols() <= 0) throw DimensionError("PartitionedMatrix: empty matrix");
    if (k < 0 || k >= a.cols()) throw PreconditionError("PartitionedMatrix: need 0 <= k < n");
    if (r < 0 || r > std::min(a.rows(), a.cols())) {
      throw PreconditionError("PartitionedMatrix: need 0 <= r <= min(m, n)");
    }
    detail::require_finite(a, "PartitionedMatrix");
  }
};

/// Unweighted PCA: a global minimizer of ||A - X||_F over rank(X) <= r.
template <typename Derived>
Matrix<typename Derived::Scalar> pca_truncate(const Eigen::MatrixBase<Derived>& a, Index r) {
  if (r < 0 || r > std::min(a.rows(), a.cols())) {
    throw PreconditionError("pca_truncate: need 0 <= r <= min(m, n)");
  }
  return hard_threshold(a, r);
}

/// Golub-Hoffman-Stewart: the X2 minimizing ||A2 - X2||_F subject to
/// rank(A1 X2) <= r, i.e. P(A2) + H_{r-k'}(P_perp(A2)) with k' = rank(A1)
/// taken numerically. k = 0 reduces to pca_truncate(A2, r).
template <typename Scalar>
Matrix<Scalar> ghs_solve(const PartitionedMatrix<Scalar>& pm) {
  pm.validate();
  const Matrix<Scalar> a2 = pm.a2();
  if (pm.k == 0) return pca_truncate(a2, pm.r);

  const Matrix<Scalar> a1 = pm.a1();
  const Index k_eff = numerical_rank(a1);
  if (pm.r < k_eff) {
    throw PreconditionError("ghs_solve: r = " + std::to_string(pm.r) + " is below rank(A1) = " +
                            std::to_string(k_eff));
  }
  if (k_eff == 0) return pca_truncate(a2, pm.r);

  // Column pivoting keeps the leading k_eff columns of Q a basis of
  // colspace(A1) even when A1 itself is column-rank-deficient.
  Eigen::ColPivHouseholderQR<Matrix<Scalar>> dec(a1);
  const Matrix<Scalar> q =
      dec.householderQ() * Matrix<Scalar>::Identity(a1.rows(), std::min(a1.rows(), a1.cols()));
  const auto basis = q.leftCols(k_eff);
  const Matrix<Scalar> inside = project_onto_colspace(basis, a2);
  const Matrix<Scalar> outside = a2 - inside;
  return inside + hard_threshold(outside, pm.r - k_eff);
}

}  // namespace wlra

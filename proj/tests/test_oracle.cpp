#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "wlra/closedform.hpp"
#include "wlra/oracle.hpp"

using namespace wlra;
using M = Matrix<double>;

namespace {

M gaussian(Index r, Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  M a(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) a(i, j) = g(rng);
  return a;
}

}  // namespace

TEST_CASE("unit weights reproduce the truncated SVD error") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const M a = gaussian(8, 9, s);
    oracle::OracleConfig cfg;
    cfg.seed = s;
    const auto res = oracle::general_wlra<double>(a, M::Ones(8, 9), 3, cfg);
    const double ey = (a - hard_threshold(a, 3)).squaredNorm();
    CHECK(res.objective == doctest::Approx(ey).epsilon(1e-8));
    CHECK(numerical_rank(res.x) <= 3);
  }
}

TEST_CASE("full rank budget fits exactly, zero rank returns zero") {
  const M a = gaussian(5, 6, 10);
  const M w = M::Constant(5, 6, 2.0);
  oracle::OracleConfig cfg;
  CHECK(oracle::general_wlra<double>(a, w, 5, cfg).objective < 1e-16);
  const auto zero = oracle::general_wlra<double>(a, w, 0, cfg);
  CHECK(zero.x.norm() == 0.0);
  CHECK(zero.objective == doctest::Approx(4.0 * a.squaredNorm()));
}

TEST_CASE("zero weights are allowed and ignored") {
  // Rank-1 matrix with one corrupted entry that carries zero weight.
  M a = gaussian(6, 1, 11) * gaussian(1, 7, 12);
  a(2, 3) += 100.0;
  M w = M::Ones(6, 7);
  w(2, 3) = 0.0;
  oracle::OracleConfig cfg;
  const auto res = oracle::general_wlra<double>(a, w, 1, cfg);
  CHECK(res.objective < 1e-16);
}

TEST_CASE("objective histories are nonincreasing") {
  const M a = gaussian(10, 12, 13);
  M w = M::Ones(10, 12);
  w.leftCols(2) = M::Constant(10, 2, 7.0);
  oracle::OracleConfig cfg;
  cfg.restarts = 4;
  const auto res = oracle::general_wlra<double>(a, w, 4, cfg);
  REQUIRE(res.histories.size() == 4);
  for (const auto& h : res.histories) {
    for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i] <= h[i - 1] * (1.0 + 1e-12) + 1e-300);
  }
}

TEST_CASE("random candidate bound brackets the oracle") {
  const M a = gaussian(8, 10, 14);
  const M w = M::Constant(8, 10, 1.0) + gaussian(8, 10, 15).cwiseAbs();
  const double bound = oracle::random_candidate_bound<double>(a, w, 3, 50, 16);
  oracle::OracleConfig cfg;
  const auto res = oracle::general_wlra<double>(a, w, 3, cfg);
  CHECK(res.objective <= bound);
  CHECK(bound <= a.cwiseProduct(w).squaredNorm());
  CHECK_THROWS_AS(oracle::random_candidate_bound<double>(a, w, 3, 0, 1), PreconditionError);
}

TEST_CASE("constrained reference agrees with the closed form") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const M a = gaussian(8, 10, 20 + s);
    const PartitionedMatrix<double> pm(a, 2, 4);
    oracle::OracleConfig cfg;
    cfg.seed = s;
    const auto ref = oracle::constrained_lra<double>(pm.a1(), pm.a2(), 4, cfg);
    CHECK(ref.objective == doctest::Approx((pm.a2() - ghs_solve(pm)).squaredNorm()).epsilon(1e-6));
  }
}

TEST_CASE("argument checks") {
  oracle::OracleConfig cfg;
  CHECK_THROWS_AS(oracle::general_wlra<double>(M::Ones(3, 3), M::Ones(3, 2), 1, cfg), DimensionError);
  CHECK_THROWS_AS(oracle::general_wlra<double>(M::Ones(3, 3), -M::Ones(3, 3), 1, cfg), PreconditionError);
  CHECK_THROWS_AS(oracle::general_wlra<double>(M::Ones(3, 3), M::Ones(3, 3), 4, cfg), PreconditionError);
  cfg.restarts = 0;
  CHECK_THROWS_AS(oracle::general_wlra<double>(M::Ones(3, 3), M::Ones(3, 3), 1, cfg), PreconditionError);
  oracle::OracleConfig ok;
  CHECK_THROWS_AS(oracle::constrained_lra<double>(gaussian(5, 3, 1), gaussian(5, 4, 2), 2, ok), PreconditionError);
}

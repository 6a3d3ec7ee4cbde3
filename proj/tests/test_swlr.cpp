#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "wlra/swlr.hpp"
#include "wlra/verify.hpp"

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

// Objective written out entry by entry, independent of the library's expression.
double objective_by_loops(const M& a, const M& w1, const M& x) {
  double f = 0.0;
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      const double w = j < w1.cols() ? w1(i, j) : 1.0;
      f += w * w * (a(i, j) - x(i, j)) * (a(i, j) - x(i, j));
    }
  }
  return f;
}

}  // namespace

TEST_CASE("objective on a hand example") {
  M a(2, 3);
  a << 1, 2, 3, 4, 5, 6;
  const PartitionedMatrix<double> pm(a, 1, 2);
  M w(2, 1);
  w << 2, 3;
  const M x1 = M::Zero(2, 1);
  const M c = M::Zero(1, 2);
  const M d = M::Zero(2, 2);
  // 4*1 + 9*16 + (4 + 9 + 25 + 36)
  CHECK(objective(pm, WeightMask<double>(w), x1, c, d) == doctest::Approx(222.0));
}

TEST_CASE("objective agrees with the entrywise definition") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const PartitionedMatrix<double> pm(gaussian(6, 8, s), 3, 4);
    const auto w = WeightMask<double>::uniform(6, 3, 0.5, 4.0, s + 1);
    SwlrState<double> st{gaussian(6, 3, s + 2), gaussian(3, 5, s + 3), gaussian(6, 5, s + 4), 0};
    CHECK(objective(pm, w, st) == doctest::Approx(objective_by_loops(pm.a, w.w1, st.assemble())).epsilon(1e-12));
  }
}

TEST_CASE("weight mask validation and scaling") {
  CHECK_THROWS_AS(WeightMask<double>(M::Zero(2, 2)), PreconditionError);
  CHECK_THROWS_AS(WeightMask<double>::uniform(2, 2, 0.0, 1.0, 0), PreconditionError);
  const auto a = WeightMask<double>::uniform(4, 3, 5.0, 10.0, 9);
  const auto b = WeightMask<double>::uniform(4, 3, 50.0, 100.0, 9);
  CHECK((b.w1 - 10.0 * a.w1).norm() < 1e-12);
  CHECK(a.w1.minCoeff() >= 5.0);
  CHECK(a.w1.maxCoeff() <= 10.0);
}

TEST_CASE("C and D step is optimal for fixed X1") {
  const PartitionedMatrix<double> pm(gaussian(7, 9, 11), 2, 4);
  const auto w = WeightMask<double>::uniform(7, 2, 1.0, 3.0, 12);
  const M x1 = gaussian(7, 2, 13);
  const auto step = solve_cd_given_x1(pm, x1);
  CHECK(numerical_rank(step.d) <= 2);
  const double best = objective(pm, w, x1, step.c, step.d);
  for (std::uint64_t s = 0; s < 500; ++s) {
    const M c = step.c + 0.1 * gaussian(2, 7, 100 + s);
    const M d = gaussian(7, 2, 2000 + s) * gaussian(2, 7, 3000 + s);
    CHECK(objective(pm, w, x1, c, d) >= best - 1e-10);
    CHECK(objective(pm, w, x1, c, step.d) >= best - 1e-10);
  }
}

TEST_CASE("X1 update matches the scalar formula for k = 1") {
  const PartitionedMatrix<double> pm(gaussian(5, 6, 21), 1, 2);
  const auto w = WeightMask<double>::uniform(5, 1, 1.0, 5.0, 22);
  const M c = gaussian(1, 5, 23);
  const M d = gaussian(5, 1, 24) * gaussian(1, 5, 25);
  const M x1 = update_x1(pm, w, c, d);
  const M resid = pm.a2() - d;
  for (Index i = 0; i < 5; ++i) {
    const double w2 = w.w1(i, 0) * w.w1(i, 0);
    const double expected = (w2 * pm.a(i, 0) + resid.row(i).dot(c.row(0))) / (w2 + c.squaredNorm());
    CHECK(x1(i, 0) == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("X1 update zeroes the finite-difference gradient") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const PartitionedMatrix<double> pm(gaussian(6, 9, 30 + s), 3, 5);
    const auto w = WeightMask<double>::uniform(6, 3, 5.0, 10.0, 40 + s);
    const auto step = solve_cd_given_x1(pm, gaussian(6, 3, 50 + s));
    SwlrState<double> st{update_x1(pm, w, step.c, step.d), step.c, step.d, 0};
    const double f = objective(pm, w, st);
    CHECK(verify::fd_gradient_norm(pm, w, st) <= 1e-6 * (1.0 + f));
    // Moving X1 anywhere else cannot help.
    for (std::uint64_t t = 0; t < 50; ++t) {
      SwlrState<double> moved = st;
      moved.x1 += 1e-3 * gaussian(6, 3, 1000 * s + t);
      CHECK(objective(pm, w, moved) >= f - 1e-12);
    }
  }
}

TEST_CASE("exactly representable input reaches zero objective") {
  const M a = gaussian(8, 3, 60) * gaussian(3, 10, 61);
  const PartitionedMatrix<double> pm(a, 2, 3);
  SwlrConfig cfg;
  cfg.init = SwlrInit::FromA1;
  const auto sol = solve(pm, WeightMask<double>::uniform(8, 2, 1.0, 2.0, 62), cfg);
  CHECK(sol.trace.final_objective() < 1e-10);
  CHECK(sol.trace.converged());
  CHECK(numerical_rank(sol.state.assemble()) <= 3);
}

TEST_CASE("descent is monotone and the trace is well formed") {
  for (std::uint64_t s = 0; s < 15; ++s) {
    const PartitionedMatrix<double> pm(gaussian(9, 12, 70 + s), 2, 4);
    SwlrConfig cfg;
    cfg.seed = s;
    cfg.max_iters = 300;
    const auto sol = solve(pm, WeightMask<double>::uniform(9, 2, 5.0, 10.0, 80 + s), cfg);
    CHECK(verify::max_relative_increase(sol.trace) <= 1e-12);
    REQUIRE(!sol.trace.records.empty());
    CHECK(std::isnan(sol.trace.records.front().step_norm));
    for (std::size_t p = 0; p < sol.trace.records.size(); ++p) CHECK(sol.trace.records[p].iter == static_cast<int>(p));
    CHECK(numerical_rank(sol.state.assemble()) <= 4);
  }
}

TEST_CASE("converged state is a fixed point of the closed form") {
  const PartitionedMatrix<double> pm(gaussian(10, 12, 90), 2, 4);
  SwlrConfig cfg;
  cfg.epsilon = 1e-12;
  cfg.max_iters = 5000;
  const auto sol = solve(pm, WeightMask<double>::uniform(10, 2, 5.0, 10.0, 91), cfg);
  REQUIRE(sol.trace.converged());
  CHECK(fixed_point_gap(pm, sol.state) <= 1e-8 * (1.0 + pm.a2().norm()));
}

TEST_CASE("stop reasons") {
  const PartitionedMatrix<double> pm(gaussian(10, 12, 100), 2, 4);
  const auto w = WeightMask<double>::uniform(10, 2, 5.0, 10.0, 101);
  SwlrConfig cfg;
  cfg.max_iters = 3;
  const auto capped = solve(pm, w, cfg);
  CHECK(capped.trace.stop == StopReason::MaxIterations);
  CHECK(capped.trace.iterations() == 3);
  CHECK_FALSE(capped.trace.converged());
  cfg.max_iters = 1;
  CHECK(solve(pm, w, cfg).trace.iterations() == 1);
}

TEST_CASE("same seed, same result") {
  const PartitionedMatrix<double> pm(gaussian(10, 12, 110), 2, 4);
  const auto w = WeightMask<double>::uniform(10, 2, 5.0, 10.0, 111);
  SwlrConfig cfg;
  cfg.seed = 7;
  const auto a = solve(pm, w, cfg);
  const auto b = solve(pm, w, cfg);
  CHECK(a.state.assemble() == b.state.assemble());
  CHECK(a.trace.iterations() == b.trace.iterations());
}

TEST_CASE("unit weights recover the Eckart-Young error") {
  const M a = verify::gapped_matrix(15, 20, 4, 1.5, 120);
  const PartitionedMatrix<double> pm(a, 2, 4);
  SwlrConfig cfg;
  cfg.max_iters = 20000;
  const auto sol = solve(pm, WeightMask<double>::ones(15, 2), cfg);
  const double ey = (a - hard_threshold(a, 4)).squaredNorm();
  CHECK(sol.trace.final_objective() == doctest::Approx(ey).epsilon(1e-6));
}

TEST_CASE("larger weights pull X1 toward A1") {
  const PartitionedMatrix<double> pm(gaussian(12, 15, 130), 3, 4);
  double previous = std::numeric_limits<double>::infinity();
  for (const double scale : {1.0, 10.0, 100.0}) {
    SwlrConfig cfg;
    cfg.seed = 1;
    const auto sol = solve(pm, WeightMask<double>::uniform(12, 3, 5.0 * scale, 10.0 * scale, 131), cfg);
    const double dev = (sol.state.x1 - pm.a1()).norm();
    CHECK(dev < previous);
    previous = dev;
  }
}

TEST_CASE("rank-deficient starting X1 is perturbed once and recorded") {
  M a = gaussian(8, 10, 140);
  a.col(1) = a.col(0);
  const PartitionedMatrix<double> pm(a, 2, 4);
  SwlrConfig cfg;
  cfg.init = SwlrInit::FromA1;
  const auto sol = solve(pm, WeightMask<double>::uniform(8, 2, 1.0, 2.0, 141), cfg);
  CHECK(sol.trace.rank_recoveries >= 1);
  CHECK(std::isfinite(sol.trace.final_objective()));
}

TEST_CASE("r = k warns and keeps D at zero") {
  const PartitionedMatrix<double> pm(gaussian(6, 8, 150), 2, 2);
  const auto sol = solve(pm, WeightMask<double>::ones(6, 2), SwlrConfig{});
  CHECK(sol.trace.warnings.size() == 1);
  CHECK(sol.state.d.norm() == 0.0);
}

TEST_CASE("preconditions") {
  const auto w = WeightMask<double>::ones(6, 2);
  CHECK_THROWS_AS(solve(PartitionedMatrix<double>(gaussian(6, 8, 1), 2, 1), w, SwlrConfig{}), PreconditionError);
  CHECK_THROWS_AS(solve(PartitionedMatrix<double>(gaussian(6, 8, 1), 0, 3), WeightMask<double>(M(6, 0)), SwlrConfig{}),
                  PreconditionError);
  CHECK_THROWS_AS(solve(PartitionedMatrix<double>(gaussian(6, 8, 1), 3, 4), w, SwlrConfig{}), DimensionError);
  SwlrConfig bad;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(solve(PartitionedMatrix<double>(gaussian(6, 8, 1), 2, 3), w, bad), PreconditionError);
}

TEST_CASE("single precision instantiation") {
  using F = Matrix<float>;
  const F a = gaussian(6, 4, 160).cast<float>() * gaussian(4, 8, 161).cast<float>();
  const PartitionedMatrix<float> pm(a, 2, 4);
  SwlrConfig cfg;
  cfg.epsilon = 1e-4;
  const auto sol = solve(pm, WeightMask<float>::ones(6, 2), cfg);
  CHECK(sol.trace.final_objective() < 1e-5f * a.squaredNorm());
}

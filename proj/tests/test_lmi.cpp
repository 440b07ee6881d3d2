#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gasflow/lmi.hpp"
#include "gasflow/network.hpp"
#include "support/test_support.hpp"

using namespace gasflow;

namespace {

Eigen::MatrixXd block_lmi(const LmiWitness& w, double gamma) {
  const int m = static_cast<int>(w.Wc.size());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  L.topLeftCorner(m, m) = w.eta.asDiagonal();
  const Eigen::MatrixXd delta = w.Wb - Eigen::MatrixXd(w.Wc.asDiagonal());
  L.topRightCorner(m, m) = delta;
  L.bottomLeftCorner(m, m) = delta.transpose();
  L.bottomRightCorner(m, m) = (w.Wc / gamma).asDiagonal();
  return L;
}

double equality_residual(const OperatorContext& ctx, const LmiWitness& w) {
  const Eigen::MatrixXd R = ctx.Aalpha.transpose() *
                            ctx.b.cwiseInverse().asDiagonal() *
                            w.Wb.transpose();
  return (w.Wa * ctx.A - R).norm();
}

double dominance_slack(const LmiWitness& w, double gamma) {
  const int m = static_cast<int>(w.Wc.size());
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    double offdiag = 0.0;
    for (int j = 0; j < m; ++j)
      if (j != i) offdiag += std::abs(w.Wb(i, j)) + std::abs(w.Wb(j, i));
    worst = std::min(worst, 2.0 * w.Wb(i, i) - w.eta(i) - gamma * offdiag);
  }
  return worst;
}

}  // namespace

TEST_CASE("min_eig basics") {
  CHECK(min_eig(Eigen::MatrixXd::Identity(3, 3)).value == doctest::Approx(1.0));
  Eigen::VectorXd d(3);
  d << 2.0, -3.0, 5.0;
  CHECK(min_eig(Eigen::MatrixXd(d.asDiagonal())).value == doctest::Approx(-3.0));
}

TEST_CASE("min_eig rejects asymmetric input") {
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(3, 3);
  M(0, 1) = 0.5;
  CHECK_THROWS_AS(min_eig(M), std::invalid_argument);
}

TEST_CASE("min_eig agrees with the Jacobi oracle") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 40; ++trial) {
    Eigen::MatrixXd M(10, 10);
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j <= i; ++j) M(i, j) = M(j, i) = u(rng);
    const MinEig r = min_eig(M);
    CHECK(r.value == doctest::Approx(testing::jacobi_min_eig(M)).epsilon(1e-8));
    // the eigenvector realizes the eigenvalue
    CHECK((M * r.vector - r.value * r.vector).norm() < 1e-8 * (1.0 + M.norm()));
  }
}

TEST_CASE("single pipe is feasible at large gamma") {
  const auto ctx = build_context(testing::single_pipe());
  const auto res = feasible_for_gamma(ctx, 100.0);
  CHECK(res.feasible);
  CHECK(res.margin > 0.0);
}

TEST_CASE("no-compression networks are feasible at any practical gamma") {
  const auto ctx = build_context(testing::triangle());
  for (double gamma : {1.5, 10.0, 1e3, 1e4}) {
    CAPTURE(gamma);
    const auto res = feasible_for_gamma(ctx, gamma);
    CHECK(res.feasible);
  }
}

TEST_CASE("extreme gamma with compression is infeasible within tolerance") {
  const auto ctx = build_context(testing::triangle(10.0, 2.0, 1.0, 1.0));
  const auto res = feasible_for_gamma(ctx, 1e12);
  CHECK_FALSE(res.feasible);
  CHECK(res.stagnated);
  CHECK(!res.diagnostic.empty());
}

TEST_CASE("returned witnesses verify independently") {
  const auto ctx = build_context(testing::kite());
  for (double gamma : {2.0, 8.0}) {
    CAPTURE(gamma);
    const auto res = feasible_for_gamma(ctx, gamma);
    REQUIRE(res.feasible);
    const auto& w = res.witness;
    CHECK(min_eig(block_lmi(w, gamma)).value >= res.margin - 1e-12);
    CHECK(res.margin > 0.0);
    CHECK(equality_residual(ctx, w) <= 1e-8 * (1.0 + w.Wb.norm()));
    CHECK(dominance_slack(w, gamma) >= 0.0);
    CHECK(w.Wc.minCoeff() > 0.0);
    CHECK(w.eta.minCoeff() > 0.0);
    CHECK(w.Wc.sum() == doctest::Approx(static_cast<double>(ctx.m)));
  }
}

TEST_CASE("constraints are homogeneous in the witness") {
  const auto ctx = build_context(testing::kite());
  const auto res = feasible_for_gamma(ctx, 4.0);
  REQUIRE(res.feasible);
  LmiWitness scaled = res.witness;
  const double s = 3.7;
  scaled.Wa *= s;
  scaled.Wb *= s;
  scaled.Wc *= s;
  scaled.eta *= s;
  CHECK(min_eig(block_lmi(scaled, 4.0)).value ==
        doctest::Approx(s * res.margin).epsilon(1e-9));
  CHECK(equality_residual(ctx, scaled) <= 1e-8 * (1.0 + scaled.Wb.norm()));
  CHECK(dominance_slack(scaled, 4.0) >= 0.0);
}

TEST_CASE("feasibility is nested in gamma") {
  // quasi-convexity direction the bisection relies on, checked empirically
  const auto ctx = build_context(testing::kite(1.4, 1.3));
  bool seen_infeasible = false;
  for (double gamma : {2.0, 5.0, 15.0, 50.0, 200.0, 2000.0, 2e4, 2e5}) {
    const auto res = feasible_for_gamma(ctx, gamma);
    CAPTURE(gamma);
    if (seen_infeasible) CHECK_FALSE(res.feasible);
    if (!res.feasible) seen_infeasible = true;
  }
  CHECK(seen_infeasible);  // compression must bound gamma eventually
}

TEST_CASE("warm starts do not change the verdict") {
  const auto ctx = build_context(testing::kite());
  const auto cold = feasible_for_gamma(ctx, 3.0);
  REQUIRE(cold.feasible);
  const auto warm = feasible_for_gamma(ctx, 3.3, {}, &cold.witness);
  CHECK(warm.feasible);
}

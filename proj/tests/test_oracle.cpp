#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gasflow/oracle.hpp"
#include "support/test_support.hpp"

using namespace gasflow;

TEST_CASE("newton converges on the single pipe") {
  const auto ctx = build_context(testing::single_pipe());
  GasState start(1, 1);
  start.pi(0) = 5.0;
  start.phi(0) = 0.1;
  start.psi(0) = 0.1;
  const auto sol = newton_solve(ctx, start);
  REQUIRE(sol.has_value());
  CHECK(sol->pi(0) == doctest::Approx(1.0));
  CHECK(sol->phi(0) == doctest::Approx(1.0));
  CHECK(sol->psi(0) == doctest::Approx(1.0));
}

TEST_CASE("a solution start is a fixed point") {
  const auto ctx = build_context(testing::single_pipe());
  GasState start(1, 1);
  start.pi(0) = 1.0;
  start.phi(0) = 1.0;
  start.psi(0) = 1.0;
  const auto sol = newton_solve(ctx, start);
  REQUIRE(sol.has_value());
  CHECK((sol->stacked() - start.stacked()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("infeasible slack pressure yields no solutions") {
  // required flow 2 forces pi_1 = 1 - 4 < 0
  const auto ctx =
      build_context(testing::single_pipe(1.0, 1.0, 0.0, 1.0, -2.0));
  OracleOptions opts;
  opts.n_starts = 100;
  CHECK(multistart(ctx, opts).empty());
}

TEST_CASE("triangle has exactly one solution") {
  const auto ctx = build_context(testing::triangle());
  const auto sols = multistart(ctx);
  REQUIRE(sols.size() == 1);
  CHECK(sols[0].phi(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(sols[0].phi(1) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(sols[0].phi(2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
  CHECK(sols[0].pi(0) == doctest::Approx(9.0).epsilon(1e-8));
  CHECK(sols[0].pi(1) == doctest::Approx(8.0).epsilon(1e-8));
}

TEST_CASE("zero injections give the zero-flow solution") {
  SUBCASE("plain pipe") {
    const auto ctx = build_context(testing::single_pipe(2.0, 1.0, 0.0, 1.0, 0.0));
    const auto sols = multistart(ctx);
    REQUIRE(sols.size() == 1);
    // the zero-flow root is degenerate, so Newton resolves it to sqrt(tol)
    CHECK(std::fabs(sols[0].phi(0)) < 2e-5);
    CHECK(std::fabs(sols[0].psi(0)) < 2e-5);
    CHECK(sols[0].pi(0) == doctest::Approx(2.0));  // alpha * slack_pi
  }
  SUBCASE("compressor pipe") {
    const auto ctx = build_context(testing::single_pipe(2.0, 1.5, 0.0, 1.0, 0.0));
    const auto sols = multistart(ctx);
    REQUIRE(sols.size() == 1);
    CHECK(sols[0].pi(0) == doctest::Approx(3.0));  // pressure chain
  }
}

TEST_CASE("trees have a unique physical solution") {
  std::mt19937_64 rng(97);
  for (int trial = 0; trial < 5; ++trial) {
    const auto net = testing::random_tree(rng, 6, 1.5);
    const auto ctx = build_context(net);
    OracleOptions opts;
    opts.n_starts = 120;
    opts.seed = 1000 + trial;
    const auto sols = multistart(ctx, opts);
    CAPTURE(trial);
    CHECK(sols.size() == 1);
  }
}

TEST_CASE("multistart is reproducible bit for bit") {
  const auto ctx = build_context(testing::kite());
  OracleOptions opts;
  opts.n_starts = 60;
  opts.seed = 424242;
  const auto a = multistart(ctx, opts);
  const auto b = multistart(ctx, opts);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i].stacked() - b[i].stacked()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("oracle agrees with sign enumeration on loopy corpuses") {
  SUBCASE("triangle") {
    const auto ctx = build_context(testing::triangle());
    const auto newton = multistart(ctx);
    const auto enumerated = testing::sign_enumeration_solutions(ctx);
    REQUIRE(newton.size() == enumerated.size());
    for (std::size_t i = 0; i < newton.size(); ++i) {
      bool matched = false;
      for (const auto& e : enumerated) {
        if ((newton[i].phi - e.phi).cwiseAbs().maxCoeff() < 1e-6) matched = true;
      }
      CHECK(matched);
    }
  }
  SUBCASE("kite") {
    const auto ctx = build_context(testing::kite());
    const auto newton = multistart(ctx);
    const auto enumerated = testing::sign_enumeration_solutions(ctx);
    REQUIRE(!newton.empty());
    REQUIRE(newton.size() == enumerated.size());
    for (std::size_t i = 0; i < newton.size(); ++i) {
      bool matched = false;
      for (const auto& e : enumerated) {
        if ((newton[i].phi - e.phi).cwiseAbs().maxCoeff() < 1e-6) matched = true;
      }
      CHECK(matched);
    }
  }
}

TEST_CASE("oracle solutions satisfy the flow equations") {
  const auto ctx = build_context(testing::kite());
  for (const auto& sol : multistart(ctx)) {
    CHECK(eval_F(ctx, sol).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((sol.psi - sol.phi.cwiseAbs()).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(sol.pi.minCoeff() >= 0.0);
  }
}

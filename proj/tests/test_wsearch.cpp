#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gasflow/wsearch.hpp"
#include "support/test_support.hpp"

using namespace gasflow;

TEST_CASE("tree condition holds on random trees with arbitrary compression") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 12; ++trial) {
    std::uniform_int_distribution<int> usize(3, 8);
    const Network net = testing::random_tree(rng, usize(rng), 2.5);
    const auto ctx = build_context(net);
    const auto tc = tree_condition(ctx);
    CAPTURE(trial);
    CHECK(tc.holds);
    CHECK(tc.residual_norm <= 1e-10 * (1.0 + ctx.Aalpha.norm()));
  }
}

TEST_CASE("tree condition holds without compression, fails with it") {
  const auto plain = build_context(testing::triangle());
  CHECK(tree_condition(plain).holds);

  const auto compressed = build_context(testing::triangle(10.0, 1.0, 2.0, 1.0));
  const auto tc = tree_condition(compressed);
  CHECK_FALSE(tc.holds);
  CHECK(tc.residual_norm > 0.1);
}

TEST_CASE("loopy networks without compression satisfy the condition") {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 8; ++trial) {
    const Network net = testing::random_loopy_no_compression(rng, 7, 3);
    const auto ctx = build_context(net);
    CHECK(tree_condition(ctx).residual_norm <= 1e-10 * (1.0 + ctx.Aalpha.norm()));
  }
}

TEST_CASE("single pipe closed-form W") {
  const auto ctx = build_context(testing::single_pipe());
  const ScalingMatrix W = build_w_tree(ctx);
  CHECK(W.Wa()(0, 0) == doctest::Approx(1.0));  // (-1)(-1)(1)^-1
  CHECK(W.Wb()(0, 0) == doctest::Approx(ctx.b(0)));
  CHECK(W.Wc()(0) == doctest::Approx(ctx.b(0)));
}

TEST_CASE("tree W is monotone wherever psi is nonnegative") {
  std::mt19937_64 rng(71);

  SUBCASE("path network") {
    Network net;
    net.nodes.push_back({0, true, 0.0, 4.0, {}});
    net.nodes.push_back({1, false, -0.5, {}, {}});
    net.nodes.push_back({2, false, -0.5, {}, {}});
    net.edges.push_back({0, 1, 1.0, 1.0, 0.0});
    net.edges.push_back({1, 2, 1.0, 1.0, 0.0});
    validate(net);
    const auto ctx = build_context(net);
    const ScalingMatrix W = build_w_tree(ctx);
    for (int trial = 0; trial < 100; ++trial) {
      const GasState z = testing::random_window_state(rng, ctx.n, ctx.m, 0.0, 3.0, 5.0);
      const auto wit = sym_psd_witness(ctx, W, z);
      CHECK(wit.min_eigenvalue >= -1e-9);
    }
  }

  SUBCASE("triangle without compression") {
    const auto ctx = build_context(testing::triangle());
    const ScalingMatrix W = build_w_tree(ctx);
    for (int trial = 0; trial < 100; ++trial) {
      const GasState z = testing::random_window_state(rng, ctx.n, ctx.m, 0.0, 3.0, 5.0);
      CHECK(sym_psd_witness(ctx, W, z).min_eigenvalue >= -1e-9);
    }
  }

  SUBCASE("compressed tree") {
    const Network net = testing::random_tree(rng, 6, 2.0);
    const auto ctx = build_context(net);
    const ScalingMatrix W = build_w_tree(ctx);
    for (int trial = 0; trial < 100; ++trial) {
      const GasState z = testing::random_window_state(rng, ctx.n, ctx.m, 0.0, 3.0, 5.0);
      CHECK(sym_psd_witness(ctx, W, z).min_eigenvalue >= -1e-9);
    }
  }
}

TEST_CASE("build_w_tree rejects networks violating the condition") {
  const auto ctx = build_context(testing::kite());
  CHECK_THROWS_AS(build_w_tree(ctx), std::invalid_argument);
}

TEST_CASE("max_gamma short-circuits the no-compression triangle") {
  const auto ctx = build_context(testing::triangle());
  const auto cert = max_gamma(ctx);
  CHECK(cert.kind == CertificateKind::TreeExact);
  CHECK(cert.cap_limited);
  CHECK(std::isinf(cert.gamma));
  CHECK(cert.sampled_min_eig >= -1e-9);
}

TEST_CASE("kite with moderate compression certifies a large finite gamma") {
  const auto ctx = build_context(testing::kite());
  const auto cert = max_gamma(ctx);
  CHECK(cert.kind == CertificateKind::GammaBounded);
  CHECK_FALSE(cert.cap_limited);
  CHECK(cert.gamma > 10.0);
  CHECK(cert.gamma < 1e4);
  CHECK(cert.lmi_margin > 0.0);
  CHECK(cert.equality_residual <= 1e-8 * (1.0 + cert.witness.Wb.norm()));
  CHECK(cert.trace_consistent);
  CHECK(cert.sampled_min_eig >= -1e-8);
  CHECK(cert.trace.size() > 3);
}

TEST_CASE("certified W passes dense monotonicity sampling in its window") {
  const auto ctx = build_context(testing::kite());
  const auto cert = max_gamma(ctx);
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 1000; ++trial) {
    const GasState z =
        testing::random_window_state(rng, ctx.n, ctx.m, 1.0, cert.gamma, 10.0);
    const auto wit = sym_psd_witness(ctx, cert.W, z);
    CHECK(wit.min_eigenvalue >= -1e-8);
  }
}

TEST_CASE("gamma is non-increasing under uniform compression scaling") {
  double previous = std::numeric_limits<double>::infinity();
  for (double t : {1.0, 2.0, 4.0}) {
    Network net = testing::kite();
    for (auto& e : net.edges) {
      if (e.alpha > 1.0) e.alpha *= t;
    }
    const auto cert = max_gamma(build_context(net));
    CHECK(cert.gamma <= previous * 1.01);
    previous = cert.gamma;
  }
}

TEST_CASE("unreachable strictness reports no certificate") {
  const auto ctx = build_context(testing::kite());
  GammaSearchOptions opts;
  opts.lmi.strict_tol = 1e9;  // no witness can clear this margin
  CHECK_THROWS_AS(max_gamma(ctx, opts), NoCertificateError);
}

#include "gasflow/wsearch.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gasflow {

namespace {

Eigen::MatrixXd pseudo_inv_rows(const Eigen::MatrixXd& A) {
  // A^T (A A^T)^-1 for full-row-rank A
  const Eigen::LLT<Eigen::MatrixXd> llt(A * A.transpose());
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("incidence matrix is rank deficient");
  }
  return llt.solve(A).transpose();
}

// Worst Sym(W J0) eigenvalue over random states of the certified domain.
// The witness matrix depends on (phi, psi) only, but pi is sampled anyway so
// the full state path is exercised.
double sample_min_eig(const OperatorContext& ctx, const ScalingMatrix& W,
                      double gamma, int samples, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  const double beta = 1.0;
  const double psi_hi = std::isfinite(gamma) ? gamma * beta : 10.0;
  std::uniform_real_distribution<double> upsi(beta, psi_hi);
  std::uniform_real_distribution<double> ufrac(-1.0, 1.0);
  std::uniform_real_distribution<double> upi(0.0, 10.0);

  double worst = std::numeric_limits<double>::infinity();
  GasState z(ctx.n, ctx.m);
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < ctx.n; ++i) z.pi(i) = upi(rng);
    for (int e = 0; e < ctx.m; ++e) {
      z.psi(e) = upsi(rng);
      z.phi(e) = std::isfinite(gamma) ? ufrac(rng) * z.psi(e) : ufrac(rng) * psi_hi;
    }
    worst = std::min(worst, sym_psd_witness(ctx, W, z).min_eigenvalue);
  }
  return worst;
}

}  // namespace

TreeCondition tree_condition(const OperatorContext& ctx, double tol) {
  const Eigen::MatrixXd pinvA = pseudo_inv_rows(ctx.A);
  const Eigen::MatrixXd PA = pinvA * ctx.A;  // m x m projector
  const Eigen::MatrixXd residual =
      ctx.Aalpha.transpose() *
      (PA - Eigen::MatrixXd::Identity(ctx.m, ctx.m));
  TreeCondition tc;
  tc.residual_norm = residual.norm();
  tc.holds = tc.residual_norm <= tol * (1.0 + ctx.Aalpha.norm());
  return tc;
}

ScalingMatrix build_w_tree(const OperatorContext& ctx) {
  const TreeCondition tc = tree_condition(ctx);
  if (!tc.holds) {
    throw std::invalid_argument(
        "tree condition does not hold (residual " +
        std::to_string(tc.residual_norm) + "); the closed-form W is invalid");
  }
  const Eigen::MatrixXd Wa = ctx.Aalpha.transpose() * pseudo_inv_rows(ctx.A);
  return ScalingMatrix::blocks(Wa, Eigen::MatrixXd(ctx.b.asDiagonal()), ctx.b);
}

DomainCertificate max_gamma(const OperatorContext& ctx,
                            const GammaSearchOptions& opts) {
  const TreeCondition tc = tree_condition(ctx);
  if (tc.holds) {
    DomainCertificate cert{build_w_tree(ctx)};
    cert.kind = CertificateKind::TreeExact;
    cert.gamma = std::numeric_limits<double>::infinity();
    cert.cap_limited = true;
    cert.equality_residual = tc.residual_norm;
    cert.sampled_min_eig = sample_min_eig(ctx, cert.W, cert.gamma,
                                          opts.validation_samples,
                                          opts.validation_seed);
    return cert;
  }

  std::vector<BisectionPoint> trace;
  LmiWitness best_witness;
  bool have_witness = false;

  auto probe = [&](double gamma) -> bool {
    const FeasibilityResult r = feasible_for_gamma(
        ctx, gamma, opts.lmi, have_witness ? &best_witness : nullptr);
    trace.push_back({gamma, r.feasible, r.margin});
    if (r.feasible) {
      best_witness = r.witness;
      have_witness = true;
    }
    return r.feasible;
  };

  double lo = 0.0;  // largest known-feasible gamma
  double hi = 0.0;  // smallest known-infeasible gamma
  bool cap_limited = false;

  // doubling phase from gamma = 2
  double g = std::min(2.0, opts.gamma_cap);
  if (probe(g)) {
    lo = g;
    while (lo < opts.gamma_cap) {
      g = std::min(2.0 * lo, opts.gamma_cap);
      if (probe(g)) {
        lo = g;
      } else {
        hi = g;
        break;
      }
    }
    if (lo >= opts.gamma_cap) cap_limited = true;
  } else {
    hi = g;
    if (!probe(opts.gamma_floor)) {
      throw NoCertificateError(
          "no certificate found: LMI infeasible even at gamma -> 1");
    }
    lo = opts.gamma_floor;
  }

  if (!cap_limited) {
    while (hi - lo > opts.tol_bisect_rel * lo) {
      const double mid = 0.5 * (lo + hi);
      if (probe(mid)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
  }

  auto assemble = [&]() -> ScalingMatrix {
    try {
      return ScalingMatrix::blocks(best_witness.Wa, best_witness.Wb,
                                   best_witness.Wc);
    } catch (const std::invalid_argument& err) {
      throw NoCertificateError(std::string("witness scaling is unusable: ") +
                               err.what());
    }
  };
  DomainCertificate cert{assemble()};
  cert.kind = CertificateKind::GammaBounded;
  cert.gamma = lo;
  cert.cap_limited = cap_limited;
  cert.lmi_margin = best_witness.margin;
  cert.witness = best_witness;
  cert.trace = trace;

  // the equality residual of the stored witness
  const Eigen::MatrixXd R =
      ctx.Aalpha.transpose() * ctx.b.cwiseInverse().asDiagonal() *
      best_witness.Wb.transpose();
  cert.equality_residual = (best_witness.Wa * ctx.A - R).norm();

  // consistency of the probe labels: no feasible gamma above an infeasible one
  for (const auto& a : trace) {
    for (const auto& b : trace) {
      if (a.feasible && !b.feasible && a.gamma > b.gamma) {
        cert.trace_consistent = false;
      }
    }
  }

  cert.sampled_min_eig =
      sample_min_eig(ctx, cert.W, cert.gamma, opts.validation_samples,
                     opts.validation_seed);
  return cert;
}

}  // namespace gasflow

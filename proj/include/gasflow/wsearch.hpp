#pragma once

#include <limits>
#include <vector>

#include "gasflow/lmi.hpp"
#include "gasflow/operator.hpp"

namespace gasflow {

struct TreeCondition {
  bool holds = false;
  double residual_norm = 0.0;
};

// Residual of Aalpha^T (A^T (A A^T)^-1 A - I) = 0. Holds for trees and for
// networks without compression.
TreeCondition tree_condition(const OperatorContext& ctx, double tol = 1e-10);

// W = blkdiag(Aalpha^T A^T (A A^T)^-1, diag(b), diag(b)); valid only when
// tree_condition holds, in which case Sym(W J0) = blkdiag(0, 2 b psi, 2 b psi).
ScalingMatrix build_w_tree(const OperatorContext& ctx);

enum class CertificateKind { TreeExact, GammaBounded };

struct BisectionPoint {
  double gamma = 0.0;
  bool feasible = false;
  double margin = 0.0;
};

struct DomainCertificate {
  ScalingMatrix W;
  double gamma = std::numeric_limits<double>::infinity();
  CertificateKind kind = CertificateKind::TreeExact;
  bool cap_limited = false;
  double equality_residual = 0.0;
  double lmi_margin = 0.0;
  LmiWitness witness;                 // populated for GammaBounded
  std::vector<BisectionPoint> trace;
  bool trace_consistent = true;       // no feasible probe above an infeasible one
  double sampled_min_eig = 0.0;       // worst Sym(W J0) eigenvalue over validation states
};

struct GammaSearchOptions {
  double gamma_cap = 1e4;
  double tol_bisect_rel = 1e-2;
  double gamma_floor = 1.0 + 1e-6;
  LmiOptions lmi;
  int validation_samples = 100;
  unsigned long long validation_seed = 20240401ull;
};

struct NoCertificateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Largest-gamma certificate by bisection over feasible_for_gamma, with a
// doubling phase to bracket the boundary and warm starts between probes.
// Short-circuits to build_w_tree when tree_condition holds. Every returned
// certificate is validated by sampling Sym(W J0) over random domain states.
DomainCertificate max_gamma(const OperatorContext& ctx,
                            const GammaSearchOptions& opts = {});

}  // namespace gasflow

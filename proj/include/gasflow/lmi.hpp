#pragma once

#include <Eigen/Dense>

#include <string>

#include "gasflow/network.hpp"

namespace gasflow {

struct MinEig {
  double value = 0.0;
  Eigen::VectorXd vector;
};

// Smallest eigenvalue and an associated eigenvector of a symmetric matrix.
// Rejects inputs whose relative asymmetry exceeds 1e-12.
MinEig min_eig(const Eigen::MatrixXd& M);

struct LmiOptions {
  double strict_tol = -1.0;   // default 1e-7 * m
  int max_iters = 5000;
  double step_scale = 1.0;    // multiplies the auto-calibrated c in c/sqrt(k)
  double eq_tol = 1e-8;
  double early_exit_margin = 1e-4;
};

// Variables of the flow-bound certificate program at a fixed gamma.
struct LmiWitness {
  double gamma = 0.0;
  Eigen::MatrixXd Wa;
  Eigen::MatrixXd Wb;
  Eigen::VectorXd Wc;
  Eigen::VectorXd eta;
  double margin = 0.0;        // lambda_min of the block LMI at the witness
};

struct FeasibilityResult {
  bool feasible = false;
  LmiWitness witness;
  double margin = 0.0;
  bool stagnated = false;     // ascent ran out of budget below the margin target
  std::string diagnostic;
};

// Decides strict feasibility, at the given gamma > 1, of
//   [[diag(eta), Wb - diag(Wc)]; [., (1/gamma) diag(Wc)]] > 0,
//   Wa A = Aalpha^T diag(b)^-1 Wb^T,
//   2 Wb_ii - eta_i >= gamma * sum_{j != i} (|Wb_ij| + |Wb_ji|),
//   sum(Wc) = m,
// by projected supergradient ascent on the concave aggregate
// min(lambda_min(LMI), dominance slack / (1 + gamma)) over the affine set.
// The returned witness is independently re-verified before being reported
// feasible. An optional warm start reuses a witness from a nearby gamma.
FeasibilityResult feasible_for_gamma(const OperatorContext& ctx, double gamma,
                                     const LmiOptions& opts = {},
                                     const LmiWitness* warm = nullptr);

}  // namespace gasflow

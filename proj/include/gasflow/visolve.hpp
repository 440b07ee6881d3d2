#pragma once

#include <string>

#include "gasflow/domains.hpp"
#include "gasflow/operator.hpp"

namespace gasflow {

struct VIOptions {
  double epsilon = 1e-8;          // target natural residual
  int max_iters = 200000;
  double step_init = 1.0;
  double backtrack_factor = 0.5;  // step shrink while the Lipschitz test fails
  double eq_tol = 1e-6;           // ||phi| - psi| certification tolerance
  double pi_tol = 1e-6;           // pressure recovery tolerance
};

struct VIResult {
  GasState z;
  double vi_residual = 0.0;
  int iters = 0;
  bool converged = false;
  double wall_ms = 0.0;
};

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Extragradient iteration for the VI <F_W(z), x - z> >= 0 over the domain:
// half step y = P(x - tau F_W(x)), full step x+ = P(x - tau F_W(y)), with
// backtracking keeping tau ||F_W(x) - F_W(y)|| <= 0.9 ||x - y||. Stops when
// the natural residual ||x - y|| / tau drops to epsilon or the budget runs
// out (the result then carries the last residual).
VIResult solve_vi(const OperatorContext& ctx, const ScalingMatrix& W,
                  const DomainSpec& spec, const VIOptions& opts = {},
                  const GasState* start = nullptr);

enum class SolveStatus { Solution, NoSolutionInDomain, Inconclusive };

const char* to_string(SolveStatus s);

struct Certification {
  SolveStatus status = SolveStatus::Inconclusive;
  GasState state;                   // pi replaced by the recovered pressures
  double vi_residual = 0.0;
  double flow_eq_residual = 0.0;    // max ||phi| - psi|
  double pressure_ls_residual = 0.0;
  double min_pi = 0.0;
};

// Three-way outcome of a VI run: a converged iterate with |phi| = psi and a
// nonnegative least-squares pressure recovery is a flow solution; a converged
// iterate failing either check proves there is no solution in the domain;
// anything unconverged is inconclusive.
Certification certify(const OperatorContext& ctx, const VIResult& vi,
                      const VIOptions& opts = {});

}  // namespace gasflow

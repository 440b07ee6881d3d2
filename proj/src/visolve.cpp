#include "gasflow/visolve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "gasflow/kernels.hpp"

namespace gasflow {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Solution: return "Solution";
    case SolveStatus::NoSolutionInDomain: return "NoSolutionInDomain";
    case SolveStatus::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

VIResult solve_vi(const OperatorContext& ctx, const ScalingMatrix& W,
                  const DomainSpec& spec, const VIOptions& opts,
                  const GasState* start) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = ctx.n, m = ctx.m;
  const int dim = n + 2 * m;
  const auto& k = kernels::active();

  DykstraScratch ws;
  Eigen::VectorXd x = start ? start->stacked() : Eigen::VectorXd::Zero(dim);
  project_into(spec, x.data(), ws);
  {
    // an empty domain (caps below the required flows) surfaces here
    GasState probe = GasState::from_stacked(n, m, x);
    const Membership member = membership(spec, probe, 1e-6);
    if (!member.inside) {
      throw ProjectionError("initial projection failed; the domain is empty "
                            "or the caps exclude the balanced flows",
                            std::move(probe), member.violations.front().magnitude);
    }
  }

  Eigen::VectorXd gx(dim), gy(dim), y(dim), xnext(dim), scratch(dim);
  double tau = opts.step_init;
  constexpr double kTauMin = 1e-14;
  constexpr double kTauGrow = 1.05;

  double residual = std::numeric_limits<double>::infinity();
  int iter = 0;
  std::vector<double> recent;

  for (; iter < opts.max_iters; ++iter) {
    eval_FW_into(ctx, W, x.data(), gx.data(), scratch.data());
    if (!gx.allFinite()) {
      std::ostringstream os;
      os << "operator evaluation diverged at iteration " << iter
         << "; last residuals:";
      for (double r : recent) os << " " << r;
      throw DivergenceError(os.str());
    }

    // backtrack until tau ||F_W(x) - F_W(y)|| <= 0.9 ||x - y||
    double dist = 0.0;
    while (true) {
      k.sub_scaled(x.data(), tau, gx.data(), y.data(),
                   static_cast<std::size_t>(dim));
      project_into(spec, y.data(), ws);
      eval_FW_into(ctx, W, y.data(), gy.data(), scratch.data());
      dist = std::sqrt(k.nrm2sq_diff(x.data(), y.data(),
                                     static_cast<std::size_t>(dim)));
      const double lip = std::sqrt(k.nrm2sq_diff(gx.data(), gy.data(),
                                                 static_cast<std::size_t>(dim)));
      if (tau * lip <= 0.9 * dist + 1e-300 || tau <= kTauMin) break;
      tau *= opts.backtrack_factor;
    }

    residual = dist / tau;
    recent.push_back(residual);
    if (recent.size() > 8) recent.erase(recent.begin());
    if (residual <= opts.epsilon) {
      ++iter;
      break;
    }

    k.sub_scaled(x.data(), tau, gy.data(), xnext.data(),
                 static_cast<std::size_t>(dim));
    project_into(spec, xnext.data(), ws);
    x.swap(xnext);
    tau = std::min(tau * kTauGrow, 1e6);
  }

  VIResult out;
  out.z = GasState::from_stacked(n, m, x);
  out.vi_residual = residual;
  out.iters = iter;
  out.converged = residual <= opts.epsilon;
  out.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return out;
}

Certification certify(const OperatorContext& ctx, const VIResult& vi,
                      const VIOptions& opts) {
  Certification cert;
  cert.state = vi.z;
  cert.vi_residual = vi.vi_residual;
  cert.flow_eq_residual =
      (vi.z.phi.cwiseAbs() - vi.z.psi).cwiseAbs().maxCoeff();

  // recover pressures from the compressor equations by least squares
  const Eigen::VectorXd rhs =
      ctx.b.cwiseProduct(vi.z.phi).cwiseProduct(vi.z.psi) - ctx.c0;
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(ctx.Aalpha);
  Eigen::VectorXd pi = cod.solve(rhs);
  cert.pressure_ls_residual = (ctx.Aalpha * pi - rhs).cwiseAbs().maxCoeff();
  cert.min_pi = pi.minCoeff();

  if (!vi.converged) {
    cert.status = SolveStatus::Inconclusive;
    return cert;
  }
  const bool flows_ok = cert.flow_eq_residual <= opts.eq_tol;
  const bool pi_ok = cert.pressure_ls_residual <= opts.pi_tol &&
                     cert.min_pi >= -opts.pi_tol;
  if (flows_ok && pi_ok) {
    cert.status = SolveStatus::Solution;
    cert.state.pi = pi.cwiseMax(0.0);
  } else {
    cert.status = SolveStatus::NoSolutionInDomain;
  }
  return cert;
}

}  // namespace gasflow

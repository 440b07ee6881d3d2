#include "gasflow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gasflow {

namespace {

double residual_norm(const OperatorContext& ctx, const Eigen::VectorXd& z) {
  Eigen::VectorXd f(z.size());
  eval_F_into(ctx, z.data(), f.data());
  return f.cwiseAbs().maxCoeff();
}

void resymmetrize(Eigen::VectorXd& z, int n, int m) {
  z.segment(n + m, m) = z.segment(n + m, m).cwiseAbs();
}

}  // namespace

std::optional<GasState> newton_solve(const OperatorContext& ctx,
                                     const GasState& start,
                                     const OracleOptions& opts) {
  const int n = ctx.n, m = ctx.m;
  const int dim = n + 2 * m;
  Eigen::VectorXd z = start.stacked();
  if (!z.allFinite()) return std::nullopt;
  resymmetrize(z, n, m);

  std::mt19937_64 perturb_rng(0x5bd1e995u ^ opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Eigen::VectorXd f(dim), step(dim), trial(dim);
  int perturbations = 0;
  for (int it = 0; it < opts.max_newton_iters; ++it) {
    eval_F_into(ctx, z.data(), f.data());
    const double fnorm = f.cwiseAbs().maxCoeff();
    if (!std::isfinite(fnorm)) return std::nullopt;
    if (fnorm <= opts.newton_tol) break;

    const GasState zs = GasState::from_stacked(n, m, z);
    const Eigen::MatrixXd J = jacobian(ctx, zs);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    step = lu.solve(-f);
    const bool solved =
        step.allFinite() && (J * step + f).norm() <= 1e-8 * (1.0 + f.norm());
    if (!solved) {
      if (++perturbations > 3) return std::nullopt;
      const double scale = 1e-6 * (1.0 + z.cwiseAbs().maxCoeff());
      for (int i = 0; i < dim; ++i) z(i) += scale * gauss(perturb_rng);
      resymmetrize(z, n, m);
      continue;
    }

    // backtracking on the residual norm
    double t = 1.0;
    bool accepted = false;
    while (t >= 1.0 / 1024.0) {
      trial = z + t * step;
      resymmetrize(trial, n, m);
      if (residual_norm(ctx, trial) <= (1.0 - 1e-4 * t) * fnorm) {
        accepted = true;
        break;
      }
      t *= opts.damping;
    }
    if (!accepted) {
      if (++perturbations > 3) return std::nullopt;
      const double scale = 1e-4 * (1.0 + z.cwiseAbs().maxCoeff());
      for (int i = 0; i < dim; ++i) z(i) += scale * gauss(perturb_rng);
      resymmetrize(z, n, m);
      continue;
    }
    z = trial;
  }

  if (residual_norm(ctx, z) > opts.newton_tol) return std::nullopt;
  GasState sol = GasState::from_stacked(n, m, z);
  // |psi - |phi||^2 <= |psi^2 - phi^2| <= 2*newton_tol once the residual is met
  if ((sol.phi.cwiseAbs() - sol.psi).cwiseAbs().maxCoeff() >
      10.0 * std::sqrt(opts.newton_tol)) {
    return std::nullopt;
  }
  if (n > 0 && sol.pi.minCoeff() < -std::max(opts.newton_tol, 1e-8)) {
    return std::nullopt;
  }
  sol.pi = sol.pi.cwiseMax(0.0);
  return sol;
}

std::vector<GasState> multistart(const OperatorContext& ctx,
                                 const OracleOptions& opts) {
  const int n = ctx.n, m = ctx.m;
  const double flow_scale =
      opts.flow_scale > 0.0 ? opts.flow_scale : ctx.q.lpNorm<1>();
  const double pi_scale = opts.pi_scale > 0.0
                              ? opts.pi_scale
                              : std::max(10.0 * ctx.slack_pi, 1.0);

  std::vector<GasState> found;
  for (int s = 0; s < opts.n_starts; ++s) {
    // per-start generator so starts can be evaluated in any order
    std::mt19937_64 rng(opts.seed ^
                        (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(s + 1)));
    std::uniform_real_distribution<double> upi(0.0, pi_scale);
    std::uniform_real_distribution<double> uflow(-flow_scale, flow_scale);
    std::uniform_real_distribution<double> ujit(0.0, 0.05 * flow_scale + 1e-6);

    GasState start(n, m);
    for (int i = 0; i < n; ++i) start.pi(i) = upi(rng);
    for (int e = 0; e < m; ++e) {
      start.phi(e) = uflow(rng);
      start.psi(e) = std::fabs(start.phi(e)) + ujit(rng);
    }
    OracleOptions per_start = opts;
    per_start.seed = opts.seed + static_cast<std::uint64_t>(s + 1);
    auto sol = newton_solve(ctx, start, per_start);
    if (!sol) continue;

    bool duplicate = false;
    for (const auto& other : found) {
      const double d =
          std::max((sol->phi - other.phi).cwiseAbs().maxCoeff(),
                   (sol->psi - other.psi).cwiseAbs().maxCoeff());
      if (d <= opts.dedupe_tol) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) found.push_back(std::move(*sol));
  }

  std::sort(found.begin(), found.end(), [](const GasState& a, const GasState& b) {
    for (int e = 0; e < a.m(); ++e) {
      if (a.phi(e) != b.phi(e)) return a.phi(e) < b.phi(e);
    }
    for (int e = 0; e < a.m(); ++e) {
      if (a.psi(e) != b.psi(e)) return a.psi(e) < b.psi(e);
    }
    return false;
  });
  return found;
}

}  // namespace gasflow

#include "gasflow/domains.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gasflow/kernels.hpp"

namespace gasflow {

namespace {

constexpr int kMaxSweeps = 10000;
constexpr double kMoveTol = 1e-10;
constexpr double kMemberTol = 1e-8;

void project_cells(const DomainSpec& spec, double* phi, double* psi, int m) {
  const auto& k = kernels::active();
  if (spec.kind == DomainKind::CBetaGamma) {
    k.project_trapezoid(phi, psi, spec.beta, spec.gamma * spec.beta, phi, psi,
                        static_cast<std::size_t>(m));
  } else {
    k.clamp_scalar(phi, -spec.flow_cap, spec.flow_cap, phi,
                   static_cast<std::size_t>(m));
    k.clamp_scalar(psi, spec.beta, spec.flow_cap, psi,
                   static_cast<std::size_t>(m));
  }
}

}  // namespace

DomainSpec make_domain(const OperatorContext& ctx, DomainKind kind, double beta,
                       double gamma, double pi_max_override,
                       double flow_cap_override) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (kind == DomainKind::CBetaGamma && !(gamma > 1.0)) {
    throw std::invalid_argument("gamma must exceed 1 for a flow-ratio domain");
  }
  DomainSpec spec;
  spec.kind = kind;
  spec.beta = beta;
  spec.gamma = kind == DomainKind::CBetaGamma
                   ? gamma
                   : std::numeric_limits<double>::infinity();
  const double default_cap =
      pi_max_override > 0.0 ? pi_max_override
                            : std::max(10.0 * ctx.slack_pi, 1.0);
  spec.pi_max = Eigen::VectorXd::Constant(ctx.n, default_cap);
  for (int i = 0; i < ctx.n; ++i) {
    if (std::isfinite(ctx.pi_cap(i))) spec.pi_max(i) = ctx.pi_cap(i);
  }
  spec.flow_cap = flow_cap_override > 0.0
                      ? flow_cap_override
                      : 10.0 * std::max({ctx.q.lpNorm<1>(), beta, 0.1});
  spec.A = ctx.A;
  spec.q = ctx.q;
  const Eigen::LLT<Eigen::MatrixXd> llt(ctx.A * ctx.A.transpose());
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("incidence matrix is rank deficient");
  }
  spec.balance_proj = llt.solve(ctx.A).transpose();
  return spec;
}

Membership membership(const DomainSpec& spec, const GasState& z, double tol) {
  Membership result;
  result.inside = true;
  auto violated = [&](const std::string& name, double amount) {
    if (amount > tol) {
      result.inside = false;
      result.violations.push_back({name, amount});
    }
  };

  const int n = spec.n();
  const int m = spec.m();
  for (int i = 0; i < n; ++i) {
    violated("pi >= 0 (node " + std::to_string(i) + ")", -z.pi(i));
    violated("pi <= pi_max (node " + std::to_string(i) + ")",
             z.pi(i) - spec.pi_max(i));
  }
  for (int e = 0; e < m; ++e) {
    violated("psi >= beta (edge " + std::to_string(e) + ")", spec.beta - z.psi(e));
    if (spec.kind == DomainKind::CBetaGamma) {
      violated("psi <= gamma*beta (edge " + std::to_string(e) + ")",
               z.psi(e) - spec.gamma * spec.beta);
      violated("|phi| <= psi (edge " + std::to_string(e) + ")",
               std::fabs(z.phi(e)) - z.psi(e));
    } else {
      violated("|phi| <= flow_cap (edge " + std::to_string(e) + ")",
               std::fabs(z.phi(e)) - spec.flow_cap);
      violated("psi <= flow_cap (edge " + std::to_string(e) + ")",
               z.psi(e) - spec.flow_cap);
    }
  }
  const Eigen::VectorXd imbalance = spec.A * z.phi - spec.q;
  for (int i = 0; i < n; ++i) {
    violated("flow balance (node " + std::to_string(i) + ")",
             std::fabs(imbalance(i)));
  }
  return result;
}

void project_edge_cell(double phi, double psi, double beta, double gamma_beta,
                       double& phi_out, double& psi_out) {
  kernels::active().project_trapezoid(&phi, &psi, beta, gamma_beta, &phi_out,
                                      &psi_out, 1);
}

int project_into(const DomainSpec& spec, double* x, DykstraScratch& ws) {
  const int n = spec.n();
  const int m = spec.m();
  const int dim = n + 2 * m;
  const auto& k = kernels::active();

  if (ws.p.size() != dim) {
    ws.p.resize(dim);
    ws.qc.resize(dim);
    ws.y.resize(dim);
    ws.xprev.resize(dim);
    ws.bal.resize(n);
    ws.zeros = Eigen::VectorXd::Zero(n);
  }
  ws.p.setZero();
  ws.qc.setZero();

  Eigen::Map<Eigen::VectorXd> xv(x, dim);
  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    ws.xprev = xv;

    // affine half-step: project x + p onto {A phi = q}
    k.add(x, ws.p.data(), ws.y.data(), static_cast<std::size_t>(dim));
    {
      Eigen::Map<Eigen::VectorXd> yphi(ws.y.data() + n, m);
      ws.bal.noalias() = spec.A * yphi;
      ws.bal -= spec.q;
      yphi.noalias() -= spec.balance_proj * ws.bal;
    }
    // p = (x + p) - y
    k.axpy(1.0, x, ws.p.data(), static_cast<std::size_t>(dim));
    k.axpy(-1.0, ws.y.data(), ws.p.data(), static_cast<std::size_t>(dim));

    // box/cell half-step: project y + qc onto the product set
    k.add(ws.y.data(), ws.qc.data(), x, static_cast<std::size_t>(dim));
    k.axpy(1.0, ws.y.data(), ws.qc.data(), static_cast<std::size_t>(dim));
    k.clamp(x, ws.zeros.data(), spec.pi_max.data(), x,
            static_cast<std::size_t>(n));
    project_cells(spec, x + n, x + n + m, m);
    k.axpy(-1.0, x, ws.qc.data(), static_cast<std::size_t>(dim));

    // x lies in the product set, y in the affine set; the iteration is done
    // only when both agree and the iterate has stopped moving (x alone can
    // stall transiently while the corrections still evolve)
    const double move =
        k.max_abs_diff(x, ws.xprev.data(), static_cast<std::size_t>(dim));
    const double split =
        k.max_abs_diff(x, ws.y.data(), static_cast<std::size_t>(dim));
    if (std::max(move, split) <= kMoveTol) {
      ++sweep;
      break;
    }
  }
  return sweep;
}

GasState project(const DomainSpec& spec, const GasState& point) {
  Eigen::VectorXd x = point.stacked();
  DykstraScratch ws;
  const int sweeps = project_into(spec, x.data(), ws);
  GasState out = GasState::from_stacked(spec.n(), spec.m(), x);
  const Membership check = membership(spec, out, kMemberTol);
  if (!check.inside) {
    double gap = 0.0;
    std::ostringstream os;
    os << "projection did not reach the domain after " << sweeps << " sweeps:";
    for (const auto& v : check.violations) {
      gap = std::max(gap, v.magnitude);
      os << " [" << v.constraint << " by " << v.magnitude << "]";
    }
    throw ProjectionError(os.str(), out, gap);
  }
  return out;
}

}  // namespace gasflow

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

#include "gasflow/operator.hpp"

namespace gasflow {

enum class DomainKind { CBeta, CBetaGamma };

// Convex state set the VI is solved over.
//   CBeta:      pi in [0, pi_max], psi >= beta, A phi = q, with |phi| and psi
//               capped at flow_cap so the set is compact.
//   CBetaGamma: pi in [0, pi_max], beta <= psi <= gamma*beta, |phi| <= psi,
//               A phi = q.
struct DomainSpec {
  DomainKind kind = DomainKind::CBetaGamma;
  double beta = 1.0;
  double gamma = std::numeric_limits<double>::infinity();
  Eigen::VectorXd pi_max;     // per-node caps, finite
  double flow_cap = 0.0;      // used by the CBeta kind only
  Eigen::MatrixXd A;
  Eigen::VectorXd q;
  Eigen::MatrixXd balance_proj;  // A^T (A A^T)^-1, for the affine projection

  int n() const { return static_cast<int>(pi_max.size()); }
  int m() const { return static_cast<int>(A.cols()); }
};

// pi_max_override / flow_cap_override <= 0 pick the defaults: per-node file
// caps where present, otherwise 10 * slack_pi; flow cap 10 * max(|q|_1, beta).
DomainSpec make_domain(const OperatorContext& ctx, DomainKind kind, double beta,
                       double gamma, double pi_max_override = 0.0,
                       double flow_cap_override = 0.0);

struct Violation {
  std::string constraint;
  double magnitude = 0.0;
};

struct Membership {
  bool inside = false;
  std::vector<Violation> violations;
};

Membership membership(const DomainSpec& spec, const GasState& z, double tol = 1e-8);

struct ProjectionError : std::runtime_error {
  ProjectionError(const std::string& what, GasState last, double gap)
      : std::runtime_error(what), last_iterate(std::move(last)), gap(gap) {}
  GasState last_iterate;
  double gap;
};

// Exact Euclidean projection of each (phi, psi) pair onto
// {(f, s): |f| <= s, beta <= s <= gamma_beta}.
void project_edge_cell(double phi, double psi, double beta, double gamma_beta,
                       double& phi_out, double& psi_out);

// Euclidean projection onto the domain by Dykstra iterations between the
// flow-balance affine set and the box/cell product set.
GasState project(const DomainSpec& spec, const GasState& point);

// Raw-buffer variant for solver loops; x is the stacked state, modified in
// place. Returns the number of sweeps used.
struct DykstraScratch {
  Eigen::VectorXd p, qc, y, xprev, bal, zeros;
};
int project_into(const DomainSpec& spec, double* x, DykstraScratch& ws);

}  // namespace gasflow

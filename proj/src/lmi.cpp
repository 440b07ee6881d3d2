#include "gasflow/lmi.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gasflow {

MinEig min_eig(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("min_eig: matrix not square");
  const double scale = 1.0 + M.cwiseAbs().maxCoeff();
  const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw std::invalid_argument("min_eig: matrix not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
  MinEig r;
  r.value = es.eigenvalues()(0);
  r.vector = es.eigenvectors().col(0);
  return r;
}

namespace {

// Fixed geometry of the constraint set: the equality
// Wa A = Aalpha^T diag(b)^-1 Wb^T is consistent iff M Wb Pv = 0, where
// M projects onto null(A) and Pv onto range(diag(b)^-1 Aalpha). Wa is then
// recovered as Aalpha^T diag(b)^-1 Wb^T A^T (A A^T)^-1.
struct Geometry {
  Eigen::MatrixXd M;       // I - A^T (A A^T)^-1 A
  Eigen::MatrixXd Pv;      // projector onto range(U^T), U = Aalpha^T diag(b)^-1
  Eigen::MatrixXd U;       // n x m
  Eigen::MatrixXd pinvA;   // A^T (A A^T)^-1, m x n
};

Geometry make_geometry(const OperatorContext& ctx) {
  Geometry g;
  const Eigen::MatrixXd AAt = ctx.A * ctx.A.transpose();
  const Eigen::LLT<Eigen::MatrixXd> llt(AAt);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("incidence matrix is rank deficient");
  }
  g.pinvA = llt.solve(ctx.A).transpose();
  g.M = Eigen::MatrixXd::Identity(ctx.m, ctx.m) - g.pinvA * ctx.A;
  g.U = ctx.Aalpha.transpose() * ctx.b.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd V = g.U.transpose();  // m x n
  const Eigen::MatrixXd VtV = g.U * g.U.transpose();
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(VtV);
  g.Pv = V * ldlt.solve(V.transpose());
  return g;
}

void project_equality(const Geometry& g, Eigen::MatrixXd& Wb) {
  Wb -= g.M * Wb * g.Pv;
}

void project_normalization(Eigen::VectorXd& Wc) {
  const double m = static_cast<double>(Wc.size());
  Wc.array() += (m - Wc.sum()) / m;
}

Eigen::MatrixXd assemble_lmi(const Eigen::MatrixXd& Wb, const Eigen::VectorXd& Wc,
                             const Eigen::VectorXd& eta, double gamma) {
  const int m = static_cast<int>(Wc.size());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  L.topLeftCorner(m, m) = eta.asDiagonal();
  const Eigen::MatrixXd delta = Wb - Eigen::MatrixXd(Wc.asDiagonal());
  L.topRightCorner(m, m) = delta;
  L.bottomLeftCorner(m, m) = delta.transpose();
  L.bottomRightCorner(m, m) = (Wc / gamma).asDiagonal();
  return L;
}

// Row slack of the diagonal-dominance condition. The off-diagonal sum uses
// |Wb_ij| + |Wb_ji| rather than |Wb_ij + Wb_ji|: with componentwise psi the
// Gershgorin radius of Sym(Wb*diag(psi)) is bounded by the former only, and
// the two coincide for symmetric Wb.
double dominance_slack(const Eigen::MatrixXd& Wb, const Eigen::VectorXd& eta,
                       double gamma, int* worst_row) {
  const int m = static_cast<int>(eta.size());
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    double offdiag = 0.0;
    for (int j = 0; j < m; ++j) {
      if (j != i) offdiag += std::abs(Wb(i, j)) + std::abs(Wb(j, i));
    }
    const double slack = 2.0 * Wb(i, i) - eta(i) - gamma * offdiag;
    if (slack < worst) {
      worst = slack;
      if (worst_row) *worst_row = i;
    }
  }
  return worst;
}

struct Point {
  Eigen::MatrixXd Wb;
  Eigen::VectorXd Wc;
  Eigen::VectorXd eta;
};

// min(lambda_min(LMI), slack/(1+gamma)); both pieces concave in the point.
double objective(const Point& p, double gamma,
                 Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>* eig,
                 double* lmi_lambda, int* worst_row) {
  const Eigen::MatrixXd L = assemble_lmi(p.Wb, p.Wc, p.eta, gamma);
  double lmin;
  if (eig) {
    eig->compute(L);
    lmin = eig->eigenvalues()(0);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
    lmin = es.eigenvalues()(0);
  }
  if (lmi_lambda) *lmi_lambda = lmin;
  const double slack = dominance_slack(p.Wb, p.eta, gamma, worst_row);
  return std::min(lmin, slack / (1.0 + gamma));
}

}  // namespace

FeasibilityResult feasible_for_gamma(const OperatorContext& ctx, double gamma,
                                     const LmiOptions& opts,
                                     const LmiWitness* warm) {
  if (!(gamma > 1.0)) throw std::invalid_argument("gamma must exceed 1");
  const int m = ctx.m;
  const double strict_tol =
      opts.strict_tol >= 0.0 ? opts.strict_tol : 1e-7 * static_cast<double>(m);
  const Geometry geom = make_geometry(ctx);

  Point p;
  if (warm && warm->Wb.rows() == m) {
    p.Wb = warm->Wb;
    p.Wc = warm->Wc;
    p.eta = warm->eta;
  } else {
    p.Wc = ctx.b * (static_cast<double>(m) / ctx.b.sum());
    p.Wb = Eigen::MatrixXd(p.Wc.asDiagonal());
    p.eta = Eigen::VectorXd::Constant(m, 1e-3);
  }
  project_equality(geom, p.Wb);
  project_normalization(p.Wc);
  // tighten eta to half the available dominance budget
  for (int i = 0; i < m; ++i) {
    double offdiag = 0.0;
    for (int j = 0; j < m; ++j)
      if (j != i) offdiag += std::abs(p.Wb(i, j)) + std::abs(p.Wb(j, i));
    p.eta(i) = std::max(1e-4, 0.5 * (2.0 * p.Wb(i, i) - gamma * offdiag));
  }

  Point best = p;
  double best_t = objective(p, gamma, nullptr, nullptr, nullptr);

  // Polyak-type steps toward the optimistic target best_t + delta; the gap
  // halves whenever progress stalls, down to a floor below strict_tol.
  double delta = std::max(0.05, 0.5 * std::fabs(best_t)) * opts.step_scale;
  const double delta_floor = 0.25 * std::max(strict_tol, 1e-12);
  int since_improve = 0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  for (int k = 1; k <= opts.max_iters; ++k) {
    double lmi_lambda = 0.0;
    int worst_row = -1;
    const double t = objective(p, gamma, &eig, &lmi_lambda, &worst_row);
    if (t > best_t) {
      best_t = t;
      best = p;
      since_improve = 0;
    } else {
      ++since_improve;
    }
    if (best_t >= std::max(opts.early_exit_margin, 10.0 * strict_tol)) break;
    if (since_improve > 60) {
      delta = std::max(0.5 * delta, delta_floor);
      p = best;  // re-center on the incumbent with the smaller gap
      since_improve = 0;
      continue;
    }

    // supergradient aggregated over every piece active within the optimism
    // gap: nearly degenerate bottom eigenvalues plus tight dominance rows
    Eigen::MatrixXd gWb = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd gWc = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd gEta = Eigen::VectorXd::Zero(m);
    const double active_tol = std::max(0.5 * delta, 1e-12);
    int pieces = 0;

    for (int i = 0; i < 2 * m && eig.eigenvalues()(i) <= lmi_lambda + active_tol;
         ++i) {
      const Eigen::VectorXd v1 = eig.eigenvectors().col(i).head(m);
      const Eigen::VectorXd v2 = eig.eigenvectors().col(i).tail(m);
      gEta += v1.cwiseProduct(v1);
      gWb += 2.0 * v1 * v2.transpose();
      gWc += -2.0 * v1.cwiseProduct(v2) + v2.cwiseProduct(v2) / gamma;
      ++pieces;
    }
    {
      const double w = 1.0 / (1.0 + gamma);
      auto sgn = [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); };
      for (int i = 0; i < m; ++i) {
        double offdiag = 0.0;
        for (int j = 0; j < m; ++j)
          if (j != i) offdiag += std::abs(p.Wb(i, j)) + std::abs(p.Wb(j, i));
        const double slack_scaled =
            (2.0 * p.Wb(i, i) - p.eta(i) - gamma * offdiag) * w;
        if (slack_scaled > t + active_tol) continue;
        gWb(i, i) += 2.0 * w;
        for (int j = 0; j < m; ++j) {
          if (j == i) continue;
          gWb(i, j) -= gamma * w * sgn(p.Wb(i, j));
          gWb(j, i) -= gamma * w * sgn(p.Wb(j, i));
        }
        gEta(i) -= w;
        ++pieces;
      }
    }
    if (pieces > 1) {
      const double inv = 1.0 / static_cast<double>(pieces);
      gWb *= inv;
      gWc *= inv;
      gEta *= inv;
    }

    const double gnorm2 =
        gWb.squaredNorm() + gWc.squaredNorm() + gEta.squaredNorm();
    if (gnorm2 < 1e-30) break;
    const double step = (best_t + delta - t) / gnorm2;
    p.Wb += step * gWb;
    p.Wc += step * gWc;
    p.eta += step * gEta;
    project_equality(geom, p.Wb);
    project_normalization(p.Wc);
  }

  FeasibilityResult res;
  res.witness.gamma = gamma;
  res.witness.Wb = best.Wb;
  res.witness.Wc = best.Wc;
  res.witness.eta = best.eta;

  // independent re-verification of the incumbent
  const Eigen::MatrixXd R = geom.U * best.Wb.transpose();  // n x m
  res.witness.Wa = R * geom.pinvA;
  const double eq_residual = (R * geom.M).norm();
  const MinEig lmi = min_eig(assemble_lmi(best.Wb, best.Wc, best.eta, gamma));
  const double slack = dominance_slack(best.Wb, best.eta, gamma, nullptr);
  res.margin = lmi.value;
  res.witness.margin = lmi.value;

  const bool eq_ok = eq_residual <= opts.eq_tol * (1.0 + R.norm());
  res.feasible = eq_ok && lmi.value >= strict_tol && slack >= 0.0 &&
                 best.Wc.minCoeff() > 0.0 && best.eta.minCoeff() > 0.0;
  if (!res.feasible) {
    res.stagnated = true;
    res.diagnostic = "infeasible within ascent tolerance (best margin " +
                     std::to_string(best_t) + ")";
  }
  return res;
}

}  // namespace gasflow

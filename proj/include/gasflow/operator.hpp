#pragma once

#include <Eigen/Dense>

#include "gasflow/network.hpp"

namespace gasflow {

// State ordered as (pi, phi, psi): squared pressures at non-slack nodes,
// edge flows, auxiliary flow magnitudes.
struct GasState {
  Eigen::VectorXd pi;
  Eigen::VectorXd phi;
  Eigen::VectorXd psi;

  GasState() = default;
  GasState(int n, int m)
      : pi(Eigen::VectorXd::Zero(n)),
        phi(Eigen::VectorXd::Zero(m)),
        psi(Eigen::VectorXd::Zero(m)) {}

  int n() const { return static_cast<int>(pi.size()); }
  int m() const { return static_cast<int>(phi.size()); }
  int dim() const { return n() + 2 * m(); }

  Eigen::VectorXd stacked() const;
  static GasState from_stacked(int n, int m, const Eigen::VectorXd& z);
};

// Invertible scaling, stored blockwise when block-diagonal:
// W = blkdiag(Wa, Wb, diag(Wc)). Construction rejects matrices whose
// smallest singular value is below 1e-10 times the largest.
class ScalingMatrix {
 public:
  static ScalingMatrix identity(int n, int m);
  static ScalingMatrix blocks(Eigen::MatrixXd Wa, Eigen::MatrixXd Wb,
                              Eigen::VectorXd Wc);
  static ScalingMatrix dense(Eigen::MatrixXd W, int n, int m);

  bool is_block() const { return block_; }
  int n() const { return n_; }
  int m() const { return m_; }
  int dim() const { return n_ + 2 * m_; }

  const Eigen::MatrixXd& Wa() const { return Wa_; }
  const Eigen::MatrixXd& Wb() const { return Wb_; }
  const Eigen::VectorXd& Wc() const { return Wc_; }

  Eigen::MatrixXd as_dense() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  void apply_into(const double* x, double* out) const;

 private:
  ScalingMatrix() = default;
  void check_invertible() const;

  bool block_ = true;
  int n_ = 0, m_ = 0;
  Eigen::MatrixXd Wa_, Wb_;
  Eigen::VectorXd Wc_;
  Eigen::MatrixXd dense_;
};

// F(z) = (A*phi - q; Aalpha*pi + c0 - b*phi*psi; 0.5*(phi^2 - psi^2)).
Eigen::VectorXd eval_F(const OperatorContext& ctx, const GasState& z);

// Jacobian of F: [[0, A, 0]; [Aalpha, -diag(b*psi), -diag(b*phi)];
//                 [0, diag(phi), -diag(psi)]].
Eigen::MatrixXd jacobian(const OperatorContext& ctx, const GasState& z);

// J0(z) = [[0, A, 0]; [-diag(b)^-1 * Aalpha, diag(psi), diag(phi)];
//           [0, -diag(phi), diag(psi)]]; satisfies
// jacobian = blkdiag(I, -diag(b), -I) * J0.
Eigen::MatrixXd j0_matrix(const OperatorContext& ctx, const GasState& z);

// F_W(z) = W * blkdiag(I, -diag(b)^-1, -I) * F(z); same zero set as F.
Eigen::VectorXd eval_FW(const OperatorContext& ctx, const ScalingMatrix& W,
                        const GasState& z);

// Raw-buffer variants used by the solver loops. `z`, `out` have n+2m entries;
// `scratch` is caller-provided workspace of the same size.
void eval_F_into(const OperatorContext& ctx, const double* z, double* out);
void eval_FW_into(const OperatorContext& ctx, const ScalingMatrix& W,
                  const double* z, double* out, double* scratch);

struct PsdWitness {
  double min_eigenvalue = 0.0;
  bool is_psd = false;
};

// Smallest eigenvalue of Sym(W*J0(z)). Monotonicity of F_W at z holds iff it
// is nonnegative. Pass tol < 0 for the default 1e-9 * (1 + max|Sym|).
PsdWitness sym_psd_witness(const OperatorContext& ctx, const ScalingMatrix& W,
                           const GasState& z, double tol = -1.0);

}  // namespace gasflow

#include "gasflow/operator.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <stdexcept>

#include "gasflow/kernels.hpp"

namespace gasflow {

Eigen::VectorXd GasState::stacked() const {
  Eigen::VectorXd z(dim());
  z << pi, phi, psi;
  return z;
}

GasState GasState::from_stacked(int n, int m, const Eigen::VectorXd& z) {
  if (z.size() != n + 2 * m) throw std::invalid_argument("stacked size mismatch");
  GasState s(n, m);
  s.pi = z.segment(0, n);
  s.phi = z.segment(n, m);
  s.psi = z.segment(n + m, m);
  return s;
}

ScalingMatrix ScalingMatrix::identity(int n, int m) {
  return blocks(Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Identity(m, m),
                Eigen::VectorXd::Ones(m));
}

ScalingMatrix ScalingMatrix::blocks(Eigen::MatrixXd Wa, Eigen::MatrixXd Wb,
                                    Eigen::VectorXd Wc) {
  if (Wa.rows() != Wa.cols() || Wb.rows() != Wb.cols() || Wb.rows() != Wc.size()) {
    throw std::invalid_argument("scaling blocks have inconsistent shapes");
  }
  ScalingMatrix w;
  w.block_ = true;
  w.n_ = static_cast<int>(Wa.rows());
  w.m_ = static_cast<int>(Wb.rows());
  w.Wa_ = std::move(Wa);
  w.Wb_ = std::move(Wb);
  w.Wc_ = std::move(Wc);
  w.check_invertible();
  return w;
}

ScalingMatrix ScalingMatrix::dense(Eigen::MatrixXd W, int n, int m) {
  if (W.rows() != n + 2 * m || W.cols() != W.rows()) {
    throw std::invalid_argument("scaling matrix has wrong shape");
  }
  ScalingMatrix w;
  w.block_ = false;
  w.n_ = n;
  w.m_ = m;
  w.dense_ = std::move(W);
  w.check_invertible();
  return w;
}

void ScalingMatrix::check_invertible() const {
  const Eigen::MatrixXd full = as_dense();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(full);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= 1e-10 * sv(0)) {
    throw std::invalid_argument("scaling matrix is numerically singular");
  }
}

Eigen::MatrixXd ScalingMatrix::as_dense() const {
  if (!block_) return dense_;
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(dim(), dim());
  full.topLeftCorner(n_, n_) = Wa_;
  full.block(n_, n_, m_, m_) = Wb_;
  full.bottomRightCorner(m_, m_) = Wc_.asDiagonal();
  return full;
}

Eigen::VectorXd ScalingMatrix::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(dim());
  apply_into(x.data(), out.data());
  return out;
}

void ScalingMatrix::apply_into(const double* x, double* out) const {
  if (!block_) {
    Eigen::Map<const Eigen::VectorXd> xv(x, dim());
    Eigen::Map<Eigen::VectorXd> ov(out, dim());
    ov.noalias() = dense_ * xv;
    return;
  }
  Eigen::Map<const Eigen::VectorXd> x1(x, n_);
  Eigen::Map<const Eigen::VectorXd> x2(x + n_, m_);
  Eigen::Map<Eigen::VectorXd> o1(out, n_);
  Eigen::Map<Eigen::VectorXd> o2(out + n_, m_);
  o1.noalias() = Wa_ * x1;
  o2.noalias() = Wb_ * x2;
  kernels::active().mul(Wc_.data(), x + n_ + m_, out + n_ + m_,
                        static_cast<std::size_t>(m_));
}

void eval_F_into(const OperatorContext& ctx, const double* z, double* out) {
  const int n = ctx.n, m = ctx.m;
  Eigen::Map<const Eigen::VectorXd> pi(z, n);
  Eigen::Map<const Eigen::VectorXd> phi(z + n, m);
  Eigen::Map<Eigen::VectorXd> balance(out, n);
  Eigen::Map<Eigen::VectorXd> pressure(out + n, m);

  balance.noalias() = ctx.A * phi;
  balance -= ctx.q;
  pressure.noalias() = ctx.Aalpha * pi;
  pressure += ctx.c0;

  const auto& k = kernels::active();
  k.sub_mul3(out + n, ctx.b.data(), z + n, z + n + m, static_cast<std::size_t>(m));
  k.half_sq_diff(z + n, z + n + m, out + n + m, static_cast<std::size_t>(m));
}

Eigen::VectorXd eval_F(const OperatorContext& ctx, const GasState& z) {
  Eigen::VectorXd out(ctx.n + 2 * ctx.m);
  const Eigen::VectorXd stacked = z.stacked();
  eval_F_into(ctx, stacked.data(), out.data());
  return out;
}

void eval_FW_into(const OperatorContext& ctx, const ScalingMatrix& W,
                  const double* z, double* out, double* scratch) {
  const int n = ctx.n, m = ctx.m;
  eval_F_into(ctx, z, scratch);
  const auto& k = kernels::active();
  k.neg_div(scratch + n, ctx.b.data(), static_cast<std::size_t>(m));
  k.negate(scratch + n + m, static_cast<std::size_t>(m));
  W.apply_into(scratch, out);
}

Eigen::VectorXd eval_FW(const OperatorContext& ctx, const ScalingMatrix& W,
                        const GasState& z) {
  Eigen::VectorXd out(ctx.n + 2 * ctx.m);
  Eigen::VectorXd scratch(ctx.n + 2 * ctx.m);
  const Eigen::VectorXd stacked = z.stacked();
  eval_FW_into(ctx, W, stacked.data(), out.data(), scratch.data());
  return out;
}

Eigen::MatrixXd jacobian(const OperatorContext& ctx, const GasState& z) {
  const int n = ctx.n, m = ctx.m;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n + 2 * m, n + 2 * m);
  J.block(0, n, n, m) = ctx.A;
  J.block(n, 0, m, n) = ctx.Aalpha;
  J.block(n, n, m, m) = (-ctx.b.cwiseProduct(z.psi)).asDiagonal();
  J.block(n, n + m, m, m) = (-ctx.b.cwiseProduct(z.phi)).asDiagonal();
  J.block(n + m, n, m, m) = z.phi.asDiagonal();
  J.block(n + m, n + m, m, m) = (-z.psi).asDiagonal();
  return J;
}

Eigen::MatrixXd j0_matrix(const OperatorContext& ctx, const GasState& z) {
  const int n = ctx.n, m = ctx.m;
  Eigen::MatrixXd J0 = Eigen::MatrixXd::Zero(n + 2 * m, n + 2 * m);
  J0.block(0, n, n, m) = ctx.A;
  J0.block(n, 0, m, n) = ctx.b.cwiseInverse().asDiagonal() * (-ctx.Aalpha);
  J0.block(n, n, m, m) = z.psi.asDiagonal();
  J0.block(n, n + m, m, m) = z.phi.asDiagonal();
  J0.block(n + m, n, m, m) = (-z.phi).asDiagonal();
  J0.block(n + m, n + m, m, m) = z.psi.asDiagonal();
  return J0;
}

PsdWitness sym_psd_witness(const OperatorContext& ctx, const ScalingMatrix& W,
                           const GasState& z, double tol) {
  const Eigen::MatrixXd WJ0 = W.as_dense() * j0_matrix(ctx, z);
  const Eigen::MatrixXd sym = WJ0 + WJ0.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym,
                                                    Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  if (tol < 0.0) {
    tol = 1e-9 * (1.0 + sym.cwiseAbs().maxCoeff());
  }
  return {lmin, lmin >= -tol};
}

}  // namespace gasflow

#include "gasflow/report.hpp"

#include <cmath>
#include <fstream>

namespace gasflow {

namespace {

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

nlohmann::json mat_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  Eigen::Index i = 0;
  for (const auto& x : j) v(i++) = x.get<double>();
  return v;
}

nlohmann::json gamma_to_json(double gamma) {
  if (!std::isfinite(gamma)) return nullptr;
  return gamma;
}

}  // namespace

nlohmann::json to_json(const GasState& z) {
  return {{"pi", vec_to_json(z.pi)},
          {"phi", vec_to_json(z.phi)},
          {"psi", vec_to_json(z.psi)}};
}

GasState gas_state_from_json(const nlohmann::json& j) {
  GasState z;
  z.pi = vec_from_json(j.at("pi"));
  z.phi = vec_from_json(j.at("phi"));
  z.psi = vec_from_json(j.at("psi"));
  if (z.psi.size() != z.phi.size()) {
    throw ParseError("state file: phi and psi lengths differ");
  }
  return z;
}

GasState load_state_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open state file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& err) {
    throw ParseError(std::string("malformed state file: ") + err.what());
  }
  return gas_state_from_json(j);
}

nlohmann::json to_json(const LmiWitness& w) {
  return {{"gamma", w.gamma},    {"Wa", mat_to_json(w.Wa)},
          {"Wb", mat_to_json(w.Wb)}, {"Wc", vec_to_json(w.Wc)},
          {"eta", vec_to_json(w.eta)}, {"margin", w.margin}};
}

nlohmann::json to_json(const DomainCertificate& cert) {
  nlohmann::json j{
      {"kind", cert.kind == CertificateKind::TreeExact ? "tree_exact"
                                                       : "gamma_bounded"},
      {"gamma", gamma_to_json(cert.gamma)},
      {"capLimited", cert.cap_limited},
      {"equalityResidual", cert.equality_residual},
      {"sampledMinEig", cert.sampled_min_eig},
  };
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& p : cert.trace) {
    trace.push_back(
        {{"gamma", p.gamma}, {"feasible", p.feasible}, {"margin", p.margin}});
  }
  j["bisectionTrace"] = trace;
  j["traceConsistent"] = cert.trace_consistent;
  if (cert.kind == CertificateKind::GammaBounded) {
    j["witness"] = to_json(cert.witness);
  }
  return j;
}

nlohmann::json to_json(const DomainSpec& spec) {
  return {{"beta", spec.beta},
          {"gamma", gamma_to_json(spec.gamma)},
          {"piMax", vec_to_json(spec.pi_max)},
          {"kind", spec.kind == DomainKind::CBeta ? "C_beta" : "C_beta_gamma"}};
}

nlohmann::json solve_report(const Certification& cert, const VIResult& vi) {
  return {{"status", to_string(cert.status)},
          {"state", to_json(cert.state)},
          {"residuals",
           {{"vi_residual", cert.vi_residual},
            {"flow_eq_residual", cert.flow_eq_residual},
            {"pressure_ls_residual", cert.pressure_ls_residual},
            {"min_pi", cert.min_pi}}},
          {"iters", vi.iters},
          {"wallMs", vi.wall_ms}};
}

}  // namespace gasflow

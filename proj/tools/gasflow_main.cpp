#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <random>
#include <sstream>

#include "gasflow/domains.hpp"
#include "gasflow/network.hpp"
#include "gasflow/operator.hpp"
#include "gasflow/oracle.hpp"
#include "gasflow/report.hpp"
#include "gasflow/visolve.hpp"
#include "gasflow/wsearch.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNoSolution = 2;
constexpr int kExitInconclusive = 3;

struct CommonArgs {
  std::string network_path;
  std::string out_path;
  double beta = 0.0;             // 0: derived from injections
  double gamma_override = 0.0;   // 0: take the certificate value
  double pi_max = 0.0;
  double epsilon = 1e-8;
  int max_iters = 200000;
  std::uint64_t seed = 0;
  int starts = 200;
  double gamma_cap = 1e4;
};

double default_beta(const gasflow::OperatorContext& ctx,
                    const gasflow::DomainCertificate& cert) {
  // pick the window floor so that flows up to |q|_1 fit under gamma * beta
  const double flow_scale = ctx.q.lpNorm<1>();
  if (std::isfinite(cert.gamma) && flow_scale > 0.0) {
    return flow_scale / cert.gamma;
  }
  return std::max(1e-6, 1e-3 * flow_scale);
}

void emit(const nlohmann::json& report, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << report.dump(2) << std::endl;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write report to " + out_path);
  out << report.dump(2) << std::endl;
}

nlohmann::json config_echo(const CommonArgs& args, double beta_used,
                           double gamma_used) {
  return {{"network", args.network_path},
          {"beta", beta_used},
          {"gamma", std::isfinite(gamma_used) ? nlohmann::json(gamma_used)
                                              : nlohmann::json()},
          {"piMax", args.pi_max},
          {"epsilon", args.epsilon},
          {"maxIters", args.max_iters},
          {"seed", args.seed},
          {"starts", args.starts},
          {"gammaCap", args.gamma_cap}};
}

gasflow::DomainSpec domain_from_certificate(
    const gasflow::OperatorContext& ctx, const gasflow::DomainCertificate& cert,
    double beta, double gamma_override, double pi_max) {
  if (cert.kind == gasflow::CertificateKind::TreeExact && gamma_override <= 0.0) {
    return gasflow::make_domain(ctx, gasflow::DomainKind::CBeta, beta,
                                std::numeric_limits<double>::infinity(), pi_max);
  }
  const double gamma = gamma_override > 0.0 ? gamma_override : cert.gamma;
  return gasflow::make_domain(ctx, gasflow::DomainKind::CBetaGamma, beta, gamma,
                              pi_max);
}

int run_solve(const CommonArgs& args) {
  const auto net = gasflow::load_network_file(args.network_path);
  const auto ctx = gasflow::build_context(net);

  gasflow::GammaSearchOptions gopts;
  gopts.gamma_cap = args.gamma_cap;
  const auto cert = gasflow::max_gamma(ctx, gopts);
  const double beta = args.beta > 0.0 ? args.beta : default_beta(ctx, cert);
  const auto spec = domain_from_certificate(ctx, cert, beta,
                                            args.gamma_override, args.pi_max);

  gasflow::VIOptions vopts;
  vopts.epsilon = args.epsilon;
  vopts.max_iters = args.max_iters;
  const auto vi = gasflow::solve_vi(ctx, cert.W, spec, vopts);
  const auto outcome = gasflow::certify(ctx, vi, vopts);

  nlohmann::json report = gasflow::solve_report(outcome, vi);
  report["certificate"] = gasflow::to_json(cert);
  report["domain"] = gasflow::to_json(spec);
  report["config"] = config_echo(args, beta, spec.gamma);
  report["gammaOverridden"] = args.gamma_override > 0.0;
  emit(report, args.out_path);

  switch (outcome.status) {
    case gasflow::SolveStatus::Solution: return kExitOk;
    case gasflow::SolveStatus::NoSolutionInDomain: return kExitNoSolution;
    case gasflow::SolveStatus::Inconclusive: return kExitInconclusive;
  }
  return kExitInconclusive;
}

int run_gamma(const CommonArgs& args) {
  const auto net = gasflow::load_network_file(args.network_path);
  const auto ctx = gasflow::build_context(net);
  gasflow::GammaSearchOptions gopts;
  gopts.gamma_cap = args.gamma_cap;
  const auto cert = gasflow::max_gamma(ctx, gopts);
  nlohmann::json report = gasflow::to_json(cert);
  report["config"] = config_echo(args, args.beta, cert.gamma);
  emit(report, args.out_path);
  return kExitOk;
}

int run_check(const CommonArgs& args, const std::string& state_path,
              int samples) {
  const auto net = gasflow::load_network_file(args.network_path);
  const auto ctx = gasflow::build_context(net);
  const auto state = gasflow::load_state_file(state_path);
  if (state.n() != ctx.n || state.m() != ctx.m) {
    throw gasflow::ValidationError("state dimensions do not match the network");
  }

  gasflow::GammaSearchOptions gopts;
  gopts.gamma_cap = args.gamma_cap;
  const auto cert = gasflow::max_gamma(ctx, gopts);
  const double beta = args.beta > 0.0 ? args.beta : default_beta(ctx, cert);
  const auto spec = domain_from_certificate(ctx, cert, beta,
                                            args.gamma_override, args.pi_max);

  const auto member = gasflow::membership(spec, state, 1e-8);
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& v : member.violations) {
    violations.push_back({{"constraint", v.constraint}, {"magnitude", v.magnitude}});
  }

  const auto at_state = gasflow::sym_psd_witness(ctx, cert.W, state);

  // seeded sampling of the witness over the domain
  std::mt19937_64 rng(args.seed);
  const double psi_hi =
      std::isfinite(spec.gamma) ? spec.gamma * spec.beta : spec.flow_cap;
  std::uniform_real_distribution<double> upsi(spec.beta, psi_hi);
  std::uniform_real_distribution<double> ufrac(-1.0, 1.0);
  std::uniform_real_distribution<double> upi01(0.0, 1.0);
  double sampled_min = std::numeric_limits<double>::infinity();
  gasflow::GasState z(ctx.n, ctx.m);
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < ctx.n; ++i) z.pi(i) = upi01(rng) * spec.pi_max(i);
    for (int e = 0; e < ctx.m; ++e) {
      z.psi(e) = upsi(rng);
      z.phi(e) = ufrac(rng) * z.psi(e);
    }
    sampled_min =
        std::min(sampled_min, gasflow::sym_psd_witness(ctx, cert.W, z).min_eigenvalue);
  }

  nlohmann::json report{
      {"inside", member.inside},
      {"violations", violations},
      {"witnessAtState",
       {{"minEigenvalue", at_state.min_eigenvalue}, {"isPsd", at_state.is_psd}}},
      {"sampledMinEig", sampled_min},
      {"samples", samples},
      {"certificate", gasflow::to_json(cert)},
      {"domain", gasflow::to_json(spec)},
  };
  report["config"] = config_echo(args, beta, spec.gamma);
  emit(report, args.out_path);
  return kExitOk;
}

int run_oracle(const CommonArgs& args) {
  const auto net = gasflow::load_network_file(args.network_path);
  const auto ctx = gasflow::build_context(net);
  gasflow::OracleOptions oopts;
  oopts.n_starts = args.starts;
  oopts.seed = args.seed;
  const auto solutions = gasflow::multistart(ctx, oopts);
  nlohmann::json list = nlohmann::json::array();
  for (const auto& s : solutions) list.push_back(gasflow::to_json(s));
  nlohmann::json report{{"method", "oracle"},
                        {"solutions", list},
                        {"count", solutions.size()}};
  report["config"] = config_echo(args, args.beta, 0.0);
  emit(report, args.out_path);
  return kExitOk;
}

int run_sweep(const CommonArgs& args, const std::string& grid_spec) {
  double lo = 0.0, step = 0.0, hi = 0.0;
  {
    char c1 = 0, c2 = 0;
    std::istringstream is(grid_spec);
    if (!(is >> lo >> c1 >> step >> c2 >> hi) || c1 != ':' || c2 != ':' ||
        step <= 0.0 || hi < lo) {
      throw std::runtime_error("bad --alpha-grid, expected A:STEP:B");
    }
  }
  const auto net = gasflow::load_network_file(args.network_path);

  std::vector<double> multipliers;
  for (double t = lo; t <= hi + 1e-12; t += step) multipliers.push_back(t);

  auto gamma_at = [&](double t) {
    gasflow::Network scaled = net;
    // the multiplier acts on compressor-equipped edges; plain pipes stay at 1
    for (auto& e : scaled.edges) {
      if (e.alpha > 1.0) e.alpha = std::max(1.0, e.alpha * t);
    }
    const auto ctx = gasflow::build_context(scaled);
    gasflow::GammaSearchOptions gopts;
    gopts.gamma_cap = args.gamma_cap;
    const auto cert = gasflow::max_gamma(ctx, gopts);
    const double g = std::isfinite(cert.gamma) ? cert.gamma : args.gamma_cap;
    return std::make_pair(g, cert.cap_limited);
  };

  std::vector<std::future<std::pair<double, bool>>> jobs;
  jobs.reserve(multipliers.size());
  for (double t : multipliers) {
    jobs.push_back(std::async(std::launch::async, gamma_at, t));
  }

  nlohmann::json points = nlohmann::json::array();
  nlohmann::json table = nlohmann::json::array();
  for (std::size_t i = 0; i < multipliers.size(); ++i) {
    const auto [g, capped] = jobs[i].get();
    points.push_back(
        {{"multiplier", multipliers[i]}, {"gamma", g}, {"capLimited", capped}});
    table.push_back({multipliers[i], g});
  }
  nlohmann::json report{{"sweep", points}, {"table", table}};
  report["config"] = config_echo(args, args.beta, 0.0);
  report["alphaGrid"] = grid_spec;
  emit(report, args.out_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steady-state gas network flow via monotone variational inequalities"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string state_path;
  std::string grid_spec;
  int check_samples = 200;

  auto add_common = [&](CLI::App* cmd, bool needs_network = true) {
    auto* opt = cmd->add_option("--network", args.network_path, "network JSON file");
    if (needs_network) opt->required();
    cmd->add_option("--beta", args.beta, "lower flow-magnitude bound");
    cmd->add_option("--gamma", args.gamma_override, "override the certified gamma");
    cmd->add_option("--pi-max", args.pi_max, "squared-pressure cap override");
    cmd->add_option("--epsilon", args.epsilon, "VI target residual");
    cmd->add_option("--max-iters", args.max_iters, "VI iteration budget");
    cmd->add_option("--seed", args.seed, "RNG seed");
    cmd->add_option("--starts", args.starts, "oracle start count");
    cmd->add_option("--gamma-cap", args.gamma_cap, "bisection upper endpoint");
    cmd->add_option("--out", args.out_path, "report path (default: stdout)");
  };

  auto* solve = app.add_subcommand("solve", "find or refute a flow solution");
  add_common(solve);
  auto* gamma = app.add_subcommand("gamma", "compute the domain certificate");
  add_common(gamma);
  auto* check = app.add_subcommand("check", "check a state against the domain");
  add_common(check);
  check->add_option("--state", state_path, "state JSON file")->required();
  check->add_option("--samples", check_samples, "witness sample count");
  auto* oracle = app.add_subcommand("oracle", "multistart Newton reference solve");
  add_common(oracle);
  auto* sweep = app.add_subcommand("sweep", "gamma vs uniform compression multiplier");
  add_common(sweep);
  sweep->add_option("--alpha-grid", grid_spec, "A:STEP:B multiplier grid")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_solve(args);
    if (gamma->parsed()) return run_gamma(args);
    if (check->parsed()) return run_check(args, state_path, check_samples);
    if (oracle->parsed()) return run_oracle(args);
    if (sweep->parsed()) return run_sweep(args, grid_spec);
  } catch (const gasflow::ParseError& err) {
    std::cerr << "input error: " << err.what() << "\n";
    return kExitInputError;
  } catch (const gasflow::ValidationError& err) {
    std::cerr << "input error: " << err.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

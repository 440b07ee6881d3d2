#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gasflow {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NetworkNode {
  int id = 0;
  bool slack = false;
  double q = 0.0;                    // injection, ignored on the slack node
  std::optional<double> pi_sq;       // squared pressure, slack node only
  std::optional<double> pi_max;      // optional squared-pressure cap
};

struct NetworkEdge {
  int from = 0;               // head k1
  int to = 0;                 // tail k2
  double lambda = 1.0;        // friction coefficient, > 0
  double alpha = 1.0;         // compression ratio, >= 1
  double r = 0.0;             // compressor position in [0, 1]
};

// Validated network: exactly one slack node, connected, one edge per node
// pair, lambda > 0, alpha >= 1, r in [0, 1].
struct Network {
  std::vector<NetworkNode> nodes;
  std::vector<NetworkEdge> edges;

  int n() const;               // non-slack node count
  int m() const { return static_cast<int>(edges.size()); }
  int slack_index() const;     // position of the slack node in `nodes`
  double slack_pi() const;

  // Maps a node id to its row in the reduced (non-slack) node ordering,
  // or -1 for the slack node. Ordering follows file order.
  int reduced_index(int node_id) const;
};

// Matrices of the flow model, assembled once per network. A, B, C are n x m
// over non-slack nodes; Aalpha is m x n with the slack contribution moved
// into the constant vector c0, so (Aalpha*pi + c0)_e = alpha_e*pi_head - pi_tail
// holds with pi_0 = slack_pi.
struct OperatorContext {
  int n = 0;
  int m = 0;
  Eigen::MatrixXd A;        // incidence over non-slack nodes
  Eigen::MatrixXd B;        // head indicator
  Eigen::MatrixXd C;        // tail indicator (entries -1)
  Eigen::MatrixXd Aalpha;   // m x n compressor-weighted pressure matrix
  Eigen::VectorXd b;        // effective friction, > 0
  Eigen::VectorXd c0;       // slack-pressure constants
  Eigen::VectorXd q;        // injections at non-slack nodes
  double slack_pi = 0.0;
  Eigen::VectorXd pi_cap;   // per-node squared-pressure caps (file value or +inf)
  std::vector<std::pair<int, int>> ends;  // (k1, k2) reduced indices, -1 = slack
};

// Throws ValidationError naming the violated invariant.
void validate(const Network& net);

// Parses the JSON network document and validates it.
Network load_network(const std::string& text);
Network load_network_file(const std::string& path);

OperatorContext build_context(const Network& net);

}  // namespace gasflow

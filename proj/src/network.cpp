#include "gasflow/network.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace gasflow {

namespace {

std::string edge_label(const NetworkEdge& e, int index) {
  std::ostringstream os;
  os << "edge " << index << " (" << e.from << "->" << e.to << ")";
  return os.str();
}

}  // namespace

int Network::n() const {
  int count = 0;
  for (const auto& node : nodes)
    if (!node.slack) ++count;
  return count;
}

int Network::slack_index() const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].slack) return static_cast<int>(i);
  return -1;
}

double Network::slack_pi() const {
  const int s = slack_index();
  return s >= 0 && nodes[s].pi_sq ? *nodes[s].pi_sq : 0.0;
}

int Network::reduced_index(int node_id) const {
  int idx = 0;
  for (const auto& node : nodes) {
    if (node.id == node_id) return node.slack ? -1 : idx;
    if (!node.slack) ++idx;
  }
  return -1;
}

void validate(const Network& net) {
  if (net.nodes.empty()) throw ValidationError("network has no nodes");
  if (net.edges.empty()) throw ValidationError("network has no edges");

  int slack_count = 0;
  std::unordered_set<int> ids;
  for (const auto& node : net.nodes) {
    if (!ids.insert(node.id).second) {
      throw ValidationError("duplicate node id " + std::to_string(node.id));
    }
    if (node.slack) {
      ++slack_count;
      if (!node.pi_sq) {
        throw ValidationError("slack node " + std::to_string(node.id) +
                              " is missing pi_sq");
      }
      if (*node.pi_sq < 0.0) {
        throw ValidationError("negative slack squared pressure");
      }
    } else if (node.pi_sq) {
      throw ValidationError("pi_sq set on non-slack node " +
                            std::to_string(node.id));
    }
    if (node.pi_max && *node.pi_max < 0.0) {
      throw ValidationError("negative pi_max on node " + std::to_string(node.id));
    }
  }
  if (slack_count == 0) throw ValidationError("no slack node");
  if (slack_count > 1) throw ValidationError("two slack nodes");

  std::unordered_set<long long> pairs;
  for (std::size_t k = 0; k < net.edges.size(); ++k) {
    const auto& e = net.edges[k];
    const int ki = static_cast<int>(k);
    if (!ids.count(e.from) || !ids.count(e.to)) {
      throw ValidationError(edge_label(e, ki) + " references unknown node");
    }
    if (e.from == e.to) throw ValidationError(edge_label(e, ki) + " is a self-loop");
    const int lo = std::min(e.from, e.to);
    const int hi = std::max(e.from, e.to);
    const long long key = static_cast<long long>(lo) << 32 | static_cast<unsigned>(hi);
    if (!pairs.insert(key).second) {
      throw ValidationError("more than one edge between nodes " +
                            std::to_string(lo) + " and " + std::to_string(hi));
    }
    if (!(e.lambda > 0.0)) {
      throw ValidationError("friction coefficient not positive on " +
                            edge_label(e, ki));
    }
    if (e.alpha < 1.0) {
      throw ValidationError("compression ratio below 1 on " + edge_label(e, ki));
    }
    if (e.r < 0.0 || e.r > 1.0) {
      throw ValidationError("compressor position outside [0,1] on " +
                            edge_label(e, ki));
    }
  }

  // connectivity over the undirected graph
  std::unordered_map<int, std::vector<int>> adj;
  for (const auto& e : net.edges) {
    adj[e.from].push_back(e.to);
    adj[e.to].push_back(e.from);
  }
  std::unordered_set<int> seen;
  std::vector<int> stack{net.nodes.front().id};
  seen.insert(net.nodes.front().id);
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adj[v]) {
      if (seen.insert(w).second) stack.push_back(w);
    }
  }
  if (seen.size() != net.nodes.size()) throw ValidationError("disconnected graph");
}

Network load_network(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw ParseError(std::string("malformed network document: ") + err.what());
  }

  Network net;
  try {
    if (!doc.contains("nodes") || !doc.contains("edges")) {
      throw ParseError("network document needs \"nodes\" and \"edges\" arrays");
    }
    for (const auto& jn : doc.at("nodes")) {
      NetworkNode node;
      node.id = jn.at("id").get<int>();
      node.slack = jn.value("slack", false);
      node.q = jn.value("q", 0.0);
      if (jn.contains("pi_sq")) node.pi_sq = jn.at("pi_sq").get<double>();
      if (jn.contains("pi_max")) node.pi_max = jn.at("pi_max").get<double>();
      net.nodes.push_back(node);
    }
    for (const auto& je : doc.at("edges")) {
      NetworkEdge edge;
      edge.from = je.at("from").get<int>();
      edge.to = je.at("to").get<int>();
      edge.lambda = je.at("lambda").get<double>();
      edge.alpha = je.value("alpha", 1.0);
      edge.r = je.value("r", 0.0);
      net.edges.push_back(edge);
    }
  } catch (const nlohmann::json::exception& err) {
    throw ParseError(std::string("malformed network document: ") + err.what());
  }

  validate(net);
  return net;
}

Network load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open network file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_network(buf.str());
}

OperatorContext build_context(const Network& net) {
  OperatorContext ctx;
  ctx.n = net.n();
  ctx.m = net.m();
  ctx.slack_pi = net.slack_pi();

  ctx.A = Eigen::MatrixXd::Zero(ctx.n, ctx.m);
  ctx.B = Eigen::MatrixXd::Zero(ctx.n, ctx.m);
  ctx.C = Eigen::MatrixXd::Zero(ctx.n, ctx.m);
  ctx.Aalpha = Eigen::MatrixXd::Zero(ctx.m, ctx.n);
  ctx.b = Eigen::VectorXd::Zero(ctx.m);
  ctx.c0 = Eigen::VectorXd::Zero(ctx.m);
  ctx.q = Eigen::VectorXd::Zero(ctx.n);
  ctx.pi_cap =
      Eigen::VectorXd::Constant(ctx.n, std::numeric_limits<double>::infinity());
  ctx.ends.resize(ctx.m);

  for (const auto& node : net.nodes) {
    if (node.slack) continue;
    const int i = net.reduced_index(node.id);
    ctx.q(i) = node.q;
    if (node.pi_max) ctx.pi_cap(i) = *node.pi_max;
  }

  for (int k = 0; k < ctx.m; ++k) {
    const auto& e = net.edges[k];
    const int head = net.reduced_index(e.from);
    const int tail = net.reduced_index(e.to);
    ctx.ends[k] = {head, tail};

    if (head >= 0) {
      ctx.A(head, k) = 1.0;
      ctx.B(head, k) = 1.0;
      ctx.Aalpha(k, head) = e.alpha;
    } else {
      ctx.c0(k) += e.alpha * ctx.slack_pi;
    }
    if (tail >= 0) {
      ctx.A(tail, k) = -1.0;
      ctx.C(tail, k) = -1.0;
      ctx.Aalpha(k, tail) = -1.0;
    } else {
      ctx.c0(k) -= ctx.slack_pi;
    }

    ctx.b(k) = (e.alpha * e.r + (1.0 - e.r)) * e.lambda;
  }

  return ctx;
}

}  // namespace gasflow

#include "djam/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "djam/errors.hpp"

namespace djam {

namespace {

std::uint64_t pair_key(int i, int j) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
         static_cast<std::uint32_t>(j);
}

}  // namespace

Network Network::build(int num_agents, int dim,
                       const std::vector<WeightedEdge>& edges) {
  if (num_agents < 1) {
    throw IndexOutOfRange("num_agents must be >= 1, got " +
                          std::to_string(num_agents));
  }
  if (dim < 1) {
    throw DimensionMismatch("dim must be >= 1, got " + std::to_string(dim));
  }

  Network net;
  net.n_ = num_agents;
  net.p_ = dim;
  net.adjacency_.resize(num_agents);
  net.weight_sums_.assign(num_agents, 0.0);

  struct Canonical {
    int i, j;
    double w;
  };
  std::vector<Canonical> canon;
  canon.reserve(edges.size());
  for (const WeightedEdge& e : edges) {
    if (e.i < 0 || e.i >= num_agents || e.j < 0 || e.j >= num_agents) {
      throw IndexOutOfRange("edge (" + std::to_string(e.i) + ", " +
                            std::to_string(e.j) + ") out of range for " +
                            std::to_string(num_agents) + " agents");
    }
    if (e.i == e.j) {
      throw SelfLoop("self-loop at agent " + std::to_string(e.i));
    }
    if (!std::isfinite(e.weight) || e.weight <= 0.0) {
      throw NonpositiveWeight("edge (" + std::to_string(e.i) + ", " +
                              std::to_string(e.j) +
                              ") has invalid weight " +
                              std::to_string(e.weight));
    }
    canon.push_back({std::min(e.i, e.j), std::max(e.i, e.j), e.weight});
  }
  std::sort(canon.begin(), canon.end(), [](const Canonical& a, const Canonical& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (std::size_t k = 1; k < canon.size(); ++k) {
    if (canon[k].i == canon[k - 1].i && canon[k].j == canon[k - 1].j) {
      throw DuplicateEdge("duplicate edge (" + std::to_string(canon[k].i) +
                          ", " + std::to_string(canon[k].j) + ")");
    }
  }

  net.edges_.reserve(canon.size());
  net.weights_.reserve(canon.size());
  for (const Canonical& c : canon) {
    int idx = static_cast<int>(net.edges_.size());
    net.edges_.push_back({c.i, c.j});
    net.weights_.push_back(c.w);
    net.edge_lookup_.emplace(pair_key(c.i, c.j), idx);
    net.adjacency_[c.i].emplace_back(c.j, c.w);
    net.adjacency_[c.j].emplace_back(c.i, c.w);
    net.weight_sums_[c.i] += c.w;
    net.weight_sums_[c.j] += c.w;
  }
  for (auto& adj : net.adjacency_) {
    std::sort(adj.begin(), adj.end());
  }

  // Connectivity: BFS from agent 0 must reach everyone. A single agent with
  // no edges is connected by definition.
  if (num_agents > 1) {
    std::vector<char> seen(num_agents, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (const auto& [v, w] : net.adjacency_[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          ++reached;
          stack.push_back(v);
        }
      }
    }
    if (reached != num_agents) {
      throw DisconnectedGraph("graph is disconnected: reached " +
                              std::to_string(reached) + " of " +
                              std::to_string(num_agents) + " agents");
    }
  }

  return net;
}

bool Network::has_edge(int i, int j) const {
  if (i < 0 || i >= n_ || j < 0 || j >= n_ || i == j) return false;
  return edge_lookup_.count(pair_key(std::min(i, j), std::max(i, j))) > 0;
}

double Network::weight(int i, int j) const {
  if (i < 0 || i >= n_ || j < 0 || j >= n_) {
    throw IndexOutOfRange("agent pair (" + std::to_string(i) + ", " +
                          std::to_string(j) + ") out of range");
  }
  if (i == j) return 0.0;
  auto it = edge_lookup_.find(pair_key(std::min(i, j), std::max(i, j)));
  return it == edge_lookup_.end() ? 0.0 : weights_[it->second];
}

int Network::edge_index(int i, int j) const {
  if (i < 0 || i >= n_ || j < 0 || j >= n_) {
    throw IndexOutOfRange("agent pair (" + std::to_string(i) + ", " +
                          std::to_string(j) + ") out of range");
  }
  auto it = i == j ? edge_lookup_.end()
                   : edge_lookup_.find(pair_key(std::min(i, j), std::max(i, j)));
  if (it == edge_lookup_.end()) {
    throw UnknownEdge("no edge between agents " + std::to_string(i) + " and " +
                      std::to_string(j));
  }
  return it->second;
}

const std::vector<std::pair<int, double>>& Network::neighbors(int i) const {
  if (i < 0 || i >= n_) {
    throw IndexOutOfRange("agent " + std::to_string(i) + " out of range");
  }
  return adjacency_[i];
}

double Network::agent_weight_sum(int j) const {
  if (j < 0 || j >= n_) {
    throw IndexOutOfRange("agent " + std::to_string(j) + " out of range");
  }
  return weight_sums_[j];
}

std::vector<WeightedEdge> parse_edge_list(std::istream& in) {
  std::vector<WeightedEdge> edges;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    if (line.find_first_not_of(" \t\r\n\v\f") == std::string::npos) {
      continue;  // blank or comment-only line
    }
    std::istringstream fields(line);
    long long i1 = 0, j1 = 0;
    double w = 0.0;
    if (!(fields >> i1 >> j1 >> w)) {
      throw ParseError("line " + std::to_string(lineno) +
                       ": expected `i j weight`");
    }
    std::string rest;
    if (fields >> rest) {
      throw ParseError("line " + std::to_string(lineno) +
                       ": trailing content `" + rest + "`");
    }
    if (i1 < 1 || j1 < 1) {
      throw ParseError("line " + std::to_string(lineno) +
                       ": agent indices are 1-based and must be >= 1");
    }
    edges.push_back({static_cast<int>(i1 - 1), static_cast<int>(j1 - 1), w});
  }
  return edges;
}

std::vector<WeightedEdge> parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  return parse_edge_list(in);
}

Network load_network_edge_list(const std::string& path, int num_agents,
                               int dim) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open edge-list file: " + path);
  }
  return Network::build(num_agents, dim, parse_edge_list(in));
}

}  // namespace djam

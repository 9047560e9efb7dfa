#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace djam {

/// Undirected edge in canonical order (i < j). Agent indices are 0-based
/// throughout the in-memory API; file formats use 1-based indices.
struct Edge {
  int i = 0;
  int j = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct WeightedEdge {
  int i = 0;
  int j = 0;
  double weight = 0.0;
};

/// The agent network: node count, model dimension, and the symmetric positive
/// coupling weights. Immutable after construction; safe for concurrent reads.
///
/// Absent edges have weight zero and are not stored. The graph is required to
/// be connected (a single agent with no edges is the permitted degenerate
/// case).
class Network {
 public:
  /// Validates and builds a network. Edges may be given in either vertex
  /// order; duplicates (in any order), self-loops, out-of-range indices,
  /// non-finite or non-positive weights, and disconnected graphs are rejected.
  static Network build(int num_agents, int dim,
                       const std::vector<WeightedEdge>& edges);

  int num_agents() const { return n_; }
  int dim() const { return p_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  /// Canonical edge list, sorted lexicographically.
  const std::vector<Edge>& edges() const { return edges_; }

  bool has_edge(int i, int j) const;

  /// W_ij for either argument order; 0 for a valid non-adjacent pair.
  double weight(int i, int j) const;

  /// Position of {i, j} in edges(); throws UnknownEdge if absent.
  int edge_index(int i, int j) const;

  double edge_weight(int edge_idx) const { return weights_[edge_idx]; }

  /// Neighbors of `i` with their coupling weights, sorted by neighbor index.
  const std::vector<std::pair<int, double>>& neighbors(int i) const;

  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }

  /// w_j = sum of incident edge weights (0 for an isolated single agent).
  double agent_weight_sum(int j) const;

 private:
  Network() = default;

  int n_ = 0;
  int p_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> weights_;
  std::vector<std::vector<std::pair<int, double>>> adjacency_;
  std::vector<double> weight_sums_;
  std::unordered_map<std::uint64_t, int> edge_lookup_;
};

/// Parses the edge-list text format: one `i j W_ij` triple per line, 1-based
/// indices, whitespace-separated, with '#' starting a comment. Returns edges
/// converted to 0-based indices.
std::vector<WeightedEdge> parse_edge_list(std::istream& in);
std::vector<WeightedEdge> parse_edge_list(const std::string& text);

/// Reads an edge-list file and builds the network.
Network load_network_edge_list(const std::string& path, int num_agents,
                               int dim);

}  // namespace djam

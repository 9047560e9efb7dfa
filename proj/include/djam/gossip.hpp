#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "djam/losses.hpp"
#include "djam/network.hpp"
#include "djam/rng.hpp"

namespace djam {

/// How the neighbor-copy tables start. The asynchronous iteration converges
/// from any start, so the default is all-zeros for reproducibility.
struct InitPolicy {
  enum class Kind { Zeros, Constant, PerAgent, PerPair };

  Kind kind = Kind::Zeros;
  double constant = 0.0;
  /// models[k] is agent k's initial model; every copy of k starts there.
  std::vector<Eigen::VectorXd> per_agent;
  /// Explicit start per stored entry: (i, k) -> agent i's copy of k. Must
  /// cover every adjacent pair exactly.
  std::map<std::pair<int, int>, Eigen::VectorXd> per_pair;

  static InitPolicy zeros() { return {}; }
  static InitPolicy constant_value(double c);
  static InitPolicy per_agent_models(std::vector<Eigen::VectorXd> models);
  static InitPolicy per_pair_entries(
      std::map<std::pair<int, int>, Eigen::VectorXd> entries);
};

/// Mutable per-trial simulation state. tables[i][a] is agent i's stored copy
/// of the model of its a-th neighbor (in net.neighbors(i) order). Own models
/// are not stored; they are derived on demand by own_model().
struct SimState {
  std::vector<std::vector<Eigen::VectorXd>> tables;
  long long round = 0;
};

SimState init_state(const Network& net,
                    const InitPolicy& policy = InitPolicy::zeros());

/// Agent i's stored copy of neighbor k's model.
const Eigen::VectorXd& table_entry(const SimState& state, const Network& net,
                                   int i, int k);

/// Random edge-activation schedule: per-edge probabilities q_e > 0 summing
/// to one, plus the seed of the deterministic generator that drives draws.
class Schedule {
 public:
  /// probs aligned with net.edges(); validates positivity and normalization
  /// (sum within 1e-12 of 1).
  Schedule(const Network& net, std::vector<double> probs, std::uint64_t seed);

  static Schedule uniform(const Network& net, std::uint64_t seed);

  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<double>& probs() const { return probs_; }
  std::uint64_t seed() const { return seed_; }

  /// Index into edges() sampled by inverse CDF from one uniform draw.
  int draw_index(Rng& rng) const;

 private:
  std::vector<Edge> edges_;
  std::vector<double> probs_;
  std::vector<double> cum_;
  std::uint64_t seed_ = 0;
};

/// One edge sampled from the schedule; advances the generator by one draw.
Edge draw_edge(const Schedule& sched, Rng& rng);

/// Per-round diagnostics. `v` is the maximum error over stored copies
/// (NaN when no reference solution was supplied), `mean_rel_error` the mean
/// over agents of ||own model - solution|| / ||solution|| (NaN when
/// unavailable), `epoch` the epoch index m when this round completes the
/// m-th epoch and 0 otherwise. Rounds are 1-based; agents here are 0-based
/// (file export shifts to 1-based).
struct TraceRow {
  long long round = 0;
  int edge_i = 0;
  int edge_j = 0;
  double v = 0.0;
  double mean_rel_error = 0.0;
  long long epoch = 0;
};

struct Trace {
  std::vector<TraceRow> rows;
};

/// One asynchronous round on edge (i, j): both endpoints recompute the other
/// agent's stored copy from the pre-round tables,
///   new copy of j at i = argmin_theta 1/2 sum_k W_jk ||theta - copy_j^k||^2 + f_j(theta),
/// and symmetrically for i at j; then both writes land and the round counter
/// advances. All other entries are untouched.
void gossip_round(SimState& state, const Network& net, const LossList& losses,
                  const Edge& edge);

/// Agent i's personal model implied by its current table (computed on
/// demand, never stored).
Eigen::VectorXd own_model(const SimState& state, const Network& net,
                          const LossList& losses, int i);

/// Runs `rounds` iterations of draw + gossip using a generator seeded from
/// the schedule. When theta_star is given, each row carries the max error V
/// over stored copies and (when every ||theta_star_i|| > 0) the mean
/// relative error of the derived own models.
Trace run_djam(SimState& state, const Network& net, const LossList& losses,
               const Schedule& sched, long long rounds,
               const std::vector<Eigen::VectorXd>* theta_star = nullptr);

/// V = max over stored entries (i, k) of ||copy_i^k - theta_star_k||.
/// Zero for a single agent with no edges.
double max_error(const SimState& state, const Network& net,
                 const std::vector<Eigen::VectorXd>& theta_star);

/// Rounds T_1 < T_2 < ... where T_{m+1} is the first round after T_m by
/// which every edge has been drawn at least once (rounds 1-based; sequence
/// truncated at the end of the input).
std::vector<long long> epoch_boundaries(const std::vector<Edge>& edge_sequence,
                                        const Network& net);

/// Worst-case per-epoch contraction factor max_i w_i / (m_i + w_i) in [0, 1).
double contraction_factor(const Network& net, const LossList& losses);

}  // namespace djam

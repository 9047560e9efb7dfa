#include "djam/gossip.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "djam/errors.hpp"

namespace djam {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int slot_of(const Network& net, int i, int k) {
  const auto& nb = net.neighbors(i);
  auto it = std::lower_bound(
      nb.begin(), nb.end(), k,
      [](const std::pair<int, double>& pr, int v) { return pr.first < v; });
  if (it == nb.end() || it->first != k) {
    throw UnknownEdge("agents " + std::to_string(i) + " and " +
                      std::to_string(k) + " are not neighbors");
  }
  return static_cast<int>(it - nb.begin());
}

void check_state_shape(const SimState& state, const Network& net) {
  if (static_cast<int>(state.tables.size()) != net.num_agents()) {
    throw DimensionMismatch("state has " + std::to_string(state.tables.size()) +
                            " agent tables for " +
                            std::to_string(net.num_agents()) + " agents");
  }
  for (int i = 0; i < net.num_agents(); ++i) {
    const auto& row = state.tables[i];
    if (row.size() != net.neighbors(i).size()) {
      throw DimensionMismatch("agent " + std::to_string(i) + " table has " +
                              std::to_string(row.size()) + " entries for " +
                              std::to_string(net.neighbors(i).size()) +
                              " neighbors");
    }
    for (const auto& v : row) {
      if (v.size() != net.dim()) {
        throw DimensionMismatch("agent " + std::to_string(i) +
                                " stores an entry of dimension " +
                                std::to_string(v.size()) + ", expected " +
                                std::to_string(net.dim()));
      }
    }
  }
}

void check_losses(const Network& net, const LossList& losses) {
  if (static_cast<int>(losses.size()) != net.num_agents()) {
    throw DimensionMismatch("losses list has " + std::to_string(losses.size()) +
                            " entries for " + std::to_string(net.num_agents()) +
                            " agents");
  }
  for (int i = 0; i < net.num_agents(); ++i) {
    if (!losses[i] || losses[i]->dim() != net.dim()) {
      throw DimensionMismatch("loss of agent " + std::to_string(i) +
                              " missing or of wrong dimension");
    }
  }
}

void check_reference(const Network& net,
                     const std::vector<Eigen::VectorXd>& theta_star) {
  if (static_cast<int>(theta_star.size()) != net.num_agents()) {
    throw DimensionMismatch("reference solution has " +
                            std::to_string(theta_star.size()) +
                            " components for " +
                            std::to_string(net.num_agents()) + " agents");
  }
  for (const auto& v : theta_star) {
    if (v.size() != net.dim()) {
      throw DimensionMismatch("reference component of dimension " +
                              std::to_string(v.size()) + ", expected " +
                              std::to_string(net.dim()));
    }
  }
}

}  // namespace

InitPolicy InitPolicy::constant_value(double c) {
  InitPolicy p;
  p.kind = Kind::Constant;
  p.constant = c;
  return p;
}

InitPolicy InitPolicy::per_agent_models(std::vector<Eigen::VectorXd> models) {
  InitPolicy p;
  p.kind = Kind::PerAgent;
  p.per_agent = std::move(models);
  return p;
}

InitPolicy InitPolicy::per_pair_entries(
    std::map<std::pair<int, int>, Eigen::VectorXd> entries) {
  InitPolicy p;
  p.kind = Kind::PerPair;
  p.per_pair = std::move(entries);
  return p;
}

SimState init_state(const Network& net, const InitPolicy& policy) {
  const int n = net.num_agents();
  const int p = net.dim();
  SimState st;
  st.tables.resize(n);
  switch (policy.kind) {
    case InitPolicy::Kind::Zeros:
    case InitPolicy::Kind::Constant: {
      const double c =
          policy.kind == InitPolicy::Kind::Constant ? policy.constant : 0.0;
      if (!std::isfinite(c)) {
        throw NonFiniteInput("init constant must be finite");
      }
      const Eigen::VectorXd fill = Eigen::VectorXd::Constant(p, c);
      for (int i = 0; i < n; ++i) {
        st.tables[i].assign(net.neighbors(i).size(), fill);
      }
      break;
    }
    case InitPolicy::Kind::PerAgent: {
      if (static_cast<int>(policy.per_agent.size()) != n) {
        throw DimensionMismatch("per-agent init needs " + std::to_string(n) +
                                " vectors, got " +
                                std::to_string(policy.per_agent.size()));
      }
      for (const auto& v : policy.per_agent) {
        if (v.size() != p) {
          throw DimensionMismatch("per-agent init vector of dimension " +
                                  std::to_string(v.size()) + ", expected " +
                                  std::to_string(p));
        }
        if (!v.allFinite()) {
          throw NonFiniteInput("per-agent init vector has non-finite entries");
        }
      }
      for (int i = 0; i < n; ++i) {
        const auto& nb = net.neighbors(i);
        st.tables[i].reserve(nb.size());
        for (const auto& [k, w] : nb) {
          st.tables[i].push_back(policy.per_agent[k]);
        }
      }
      break;
    }
    case InitPolicy::Kind::PerPair: {
      for (const auto& [key, v] : policy.per_pair) {
        if (!net.has_edge(key.first, key.second)) {
          throw UnknownEdge("per-pair init entry (" +
                            std::to_string(key.first) + ", " +
                            std::to_string(key.second) +
                            ") is not an adjacent pair");
        }
        if (v.size() != p) {
          throw DimensionMismatch("per-pair init vector of dimension " +
                                  std::to_string(v.size()) + ", expected " +
                                  std::to_string(p));
        }
        if (!v.allFinite()) {
          throw NonFiniteInput("per-pair init vector has non-finite entries");
        }
      }
      for (int i = 0; i < n; ++i) {
        const auto& nb = net.neighbors(i);
        st.tables[i].reserve(nb.size());
        for (const auto& [k, w] : nb) {
          auto it = policy.per_pair.find({i, k});
          if (it == policy.per_pair.end()) {
            throw MissingNeighborModel("per-pair init is missing entry (" +
                                       std::to_string(i) + ", " +
                                       std::to_string(k) + ")");
          }
          st.tables[i].push_back(it->second);
        }
      }
      break;
    }
  }
  st.round = 0;
  return st;
}

const Eigen::VectorXd& table_entry(const SimState& state, const Network& net,
                                   int i, int k) {
  check_state_shape(state, net);
  return state.tables[i][slot_of(net, i, k)];
}

Schedule::Schedule(const Network& net, std::vector<double> probs,
                   std::uint64_t seed)
    : edges_(net.edges()), probs_(std::move(probs)), seed_(seed) {
  if (edges_.empty()) {
    throw InvalidSchedule("network has no edges to schedule");
  }
  if (probs_.size() != edges_.size()) {
    throw InvalidSchedule("need one probability per edge: " +
                          std::to_string(probs_.size()) + " given for " +
                          std::to_string(edges_.size()) + " edges");
  }
  double sum = 0.0;
  for (double q : probs_) {
    if (!std::isfinite(q) || q <= 0.0) {
      throw InvalidSchedule(
          "every edge needs a strictly positive probability, got " +
          std::to_string(q));
    }
    sum += q;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw InvalidSchedule("probabilities sum to " + std::to_string(sum) +
                          ", expected 1");
  }
  cum_.resize(probs_.size());
  double acc = 0.0;
  for (std::size_t e = 0; e < probs_.size(); ++e) {
    acc += probs_[e];
    cum_[e] = acc;
  }
  cum_.back() = 1.0;
}

Schedule Schedule::uniform(const Network& net, std::uint64_t seed) {
  const int m = net.num_edges();
  std::vector<double> probs(m, m > 0 ? 1.0 / m : 0.0);
  return Schedule(net, std::move(probs), seed);
}

int Schedule::draw_index(Rng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  if (it == cum_.end()) --it;  // unreachable: cum_ ends at 1.0 > u
  return static_cast<int>(it - cum_.begin());
}

Edge draw_edge(const Schedule& sched, Rng& rng) {
  return sched.edges()[sched.draw_index(rng)];
}

void gossip_round(SimState& state, const Network& net, const LossList& losses,
                  const Edge& edge) {
  check_state_shape(state, net);
  check_losses(net, losses);
  net.edge_index(edge.i, edge.j);  // rejects non-edges
  // Both updates read the pre-round tables; writes land afterwards so the
  // result is independent of their order.
  Eigen::VectorXd new_copy_of_j = local_solve_row(net, losses, edge.j,
                                                  state.tables[edge.j]);
  Eigen::VectorXd new_copy_of_i = local_solve_row(net, losses, edge.i,
                                                  state.tables[edge.i]);
  state.tables[edge.i][slot_of(net, edge.i, edge.j)] = std::move(new_copy_of_j);
  state.tables[edge.j][slot_of(net, edge.j, edge.i)] = std::move(new_copy_of_i);
  ++state.round;
}

Eigen::VectorXd own_model(const SimState& state, const Network& net,
                          const LossList& losses, int i) {
  check_state_shape(state, net);
  return local_solve_row(net, losses, i, state.tables[i]);
}

double max_error(const SimState& state, const Network& net,
                 const std::vector<Eigen::VectorXd>& theta_star) {
  check_state_shape(state, net);
  check_reference(net, theta_star);
  double v = 0.0;
  for (int i = 0; i < net.num_agents(); ++i) {
    const auto& nb = net.neighbors(i);
    for (std::size_t a = 0; a < nb.size(); ++a) {
      v = std::max(v, (state.tables[i][a] - theta_star[nb[a].first]).norm());
    }
  }
  return v;
}

std::vector<long long> epoch_boundaries(const std::vector<Edge>& edge_sequence,
                                        const Network& net) {
  std::vector<long long> out;
  const int m = net.num_edges();
  if (m == 0) return out;
  std::vector<char> seen(m, 0);
  int seen_count = 0;
  for (std::size_t t = 0; t < edge_sequence.size(); ++t) {
    const int e = net.edge_index(edge_sequence[t].i, edge_sequence[t].j);
    if (!seen[e]) {
      seen[e] = 1;
      if (++seen_count == m) {
        out.push_back(static_cast<long long>(t) + 1);
        std::fill(seen.begin(), seen.end(), 0);
        seen_count = 0;
      }
    }
  }
  return out;
}

double contraction_factor(const Network& net, const LossList& losses) {
  check_losses(net, losses);
  double beta = 0.0;
  for (int i = 0; i < net.num_agents(); ++i) {
    const double w = net.agent_weight_sum(i);
    const double m = losses[i]->strong_convexity();
    beta = std::max(beta, w / (m + w));
  }
  return beta;
}

Trace run_djam(SimState& state, const Network& net, const LossList& losses,
               const Schedule& sched, long long rounds,
               const std::vector<Eigen::VectorXd>* theta_star) {
  if (rounds < 0) {
    throw IndexOutOfRange("rounds must be >= 0, got " + std::to_string(rounds));
  }
  Trace trace;
  if (rounds == 0) return trace;
  check_state_shape(state, net);
  check_losses(net, losses);
  if (sched.num_edges() != net.num_edges()) {
    throw InvalidSchedule("schedule covers " + std::to_string(sched.num_edges()) +
                          " edges, network has " +
                          std::to_string(net.num_edges()));
  }

  const int n = net.num_agents();
  const int p = net.dim();
  const bool scalar = p == 1;
  const bool with_ref = theta_star != nullptr;
  bool with_rel = with_ref;
  std::vector<double> norm_star;
  if (with_ref) {
    check_reference(net, *theta_star);
    norm_star.resize(n);
    for (int i = 0; i < n; ++i) {
      norm_star[i] = (*theta_star)[i].norm();
      if (norm_star[i] == 0.0) with_rel = false;
    }
  }

  std::vector<double> wsum(n);
  for (int i = 0; i < n; ++i) wsum[i] = net.agent_weight_sum(i);

  // slot layout: flat index offset[i] + a for tables[i][a]
  std::vector<int> offset(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    offset[i + 1] = offset[i] + static_cast<int>(net.neighbors(i).size());
  }
  std::vector<std::pair<int, int>> edge_slots(net.num_edges());
  for (int e = 0; e < net.num_edges(); ++e) {
    const Edge& ed = net.edges()[e];
    edge_slots[e] = {offset[ed.i] + slot_of(net, ed.i, ed.j),
                     offset[ed.j] + slot_of(net, ed.j, ed.i)};
  }

  auto entry_error = [&](int i, int a) {
    const int k = net.neighbors(i)[a].first;
    return scalar ? std::abs(state.tables[i][a][0] - (*theta_star)[k][0])
                  : (state.tables[i][a] - (*theta_star)[k]).norm();
  };

  std::vector<double> err;
  double vmax = 0.0;
  int vargmax = 0;
  if (with_ref) {
    err.resize(offset[n]);
    for (int i = 0; i < n; ++i) {
      for (int a = 0; a < offset[i + 1] - offset[i]; ++a) {
        const double e = entry_error(i, a);
        err[offset[i] + a] = e;
        if (e > vmax) {
          vmax = e;
          vargmax = offset[i] + a;
        }
      }
    }
  }

  auto solve_own1 = [&](int j) {
    const auto& nb = net.neighbors(j);
    const auto& row = state.tables[j];
    double s = 0.0;
    for (std::size_t a = 0; a < nb.size(); ++a) s += nb[a].second * row[a][0];
    return resolvent1(*losses[j], wsum[j], s);
  };
  auto solve_own = [&](int j) {
    const auto& nb = net.neighbors(j);
    const auto& row = state.tables[j];
    Eigen::VectorXd s = Eigen::VectorXd::Zero(p);
    for (std::size_t a = 0; a < nb.size(); ++a) s += nb[a].second * row[a];
    return resolvent(*losses[j], wsum[j], s);
  };

  std::vector<double> rel;
  std::vector<double> own1;
  std::vector<Eigen::VectorXd> own;
  if (with_rel) {
    rel.resize(n);
    if (scalar) {
      own1.resize(n);
      for (int i = 0; i < n; ++i) {
        own1[i] = solve_own1(i);
        rel[i] = std::abs(own1[i] - (*theta_star)[i][0]) / norm_star[i];
      }
    } else {
      own.resize(n);
      for (int i = 0; i < n; ++i) {
        own[i] = solve_own(i);
        rel[i] = (own[i] - (*theta_star)[i]).norm() / norm_star[i];
      }
    }
  }

  std::vector<char> seen(net.num_edges(), 0);
  int seen_count = 0;
  long long epoch_idx = 0;

  Rng rng(sched.seed());
  trace.rows.reserve(static_cast<std::size_t>(rounds));

  for (long long r = 0; r < rounds; ++r) {
    const int eidx = sched.draw_index(rng);
    const Edge e = sched.edges()[eidx];
    const int i = e.i;
    const int j = e.j;
    const auto [slot_ij, slot_ji] = edge_slots[eidx];

    if (scalar) {
      const double new_copy_of_j = solve_own1(j);
      const double new_copy_of_i = solve_own1(i);
      state.tables[i][slot_ij - offset[i]][0] = new_copy_of_j;
      state.tables[j][slot_ji - offset[j]][0] = new_copy_of_i;
    } else {
      Eigen::VectorXd new_copy_of_j = solve_own(j);
      Eigen::VectorXd new_copy_of_i = solve_own(i);
      state.tables[i][slot_ij - offset[i]] = std::move(new_copy_of_j);
      state.tables[j][slot_ji - offset[j]] = std::move(new_copy_of_i);
    }
    ++state.round;

    TraceRow row;
    row.round = state.round;
    row.edge_i = i;
    row.edge_j = j;
    row.v = kNaN;
    row.mean_rel_error = kNaN;

    if (with_ref) {
      const double e1 = entry_error(i, slot_ij - offset[i]);
      const double e2 = entry_error(j, slot_ji - offset[j]);
      const bool rescan = vargmax == slot_ij || vargmax == slot_ji;
      err[slot_ij] = e1;
      err[slot_ji] = e2;
      if (rescan) {
        vmax = 0.0;
        vargmax = 0;
        for (int s = 0; s < offset[n]; ++s) {
          if (err[s] > vmax) {
            vmax = err[s];
            vargmax = s;
          }
        }
      } else {
        if (e1 > vmax) {
          vmax = e1;
          vargmax = slot_ij;
        }
        if (e2 > vmax) {
          vmax = e2;
          vargmax = slot_ji;
        }
      }
      row.v = vmax;
    }

    if (with_rel) {
      if (scalar) {
        own1[i] = solve_own1(i);
        own1[j] = solve_own1(j);
        rel[i] = std::abs(own1[i] - (*theta_star)[i][0]) / norm_star[i];
        rel[j] = std::abs(own1[j] - (*theta_star)[j][0]) / norm_star[j];
      } else {
        own[i] = solve_own(i);
        own[j] = solve_own(j);
        rel[i] = (own[i] - (*theta_star)[i]).norm() / norm_star[i];
        rel[j] = (own[j] - (*theta_star)[j]).norm() / norm_star[j];
      }
      double sum = 0.0;
      for (int k = 0; k < n; ++k) sum += rel[k];
      row.mean_rel_error = sum / n;
    }

    if (!seen[eidx]) {
      seen[eidx] = 1;
      if (++seen_count == net.num_edges()) {
        ++epoch_idx;
        row.epoch = epoch_idx;
        std::fill(seen.begin(), seen.end(), 0);
        seen_count = 0;
      }
    }

    trace.rows.push_back(row);
  }

  return trace;
}

}  // namespace djam

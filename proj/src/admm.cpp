#include "djam/admm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "djam/errors.hpp"

namespace djam {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

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

void check_state_shape(const AdmmState& state, const Network& net) {
  if (static_cast<int>(state.theta.size()) != net.num_agents() ||
      static_cast<int>(state.copies.size()) != net.num_edges() ||
      static_cast<int>(state.duals.size()) != net.num_edges()) {
    throw DimensionMismatch("ADMM state does not match the network layout");
  }
}

// Slot of agent `a`'s copy on edge index e.
int side_of(const Network& net, int e, int a) {
  return net.edges()[e].i == a ? 0 : 1;
}

// sum over neighbors k of (rho z_ik - u_ik), ascending k.
Eigen::VectorXd penalty_sum(const AdmmState& state, const Network& net,
                            int i) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(net.dim());
  for (const auto& [k, w] : net.neighbors(i)) {
    const int e = net.edge_index(i, k);
    const int side = side_of(net, e, i);
    s += state.rho * state.copies[e][side] - state.duals[e][side];
  }
  return s;
}

double penalty_sum1(const AdmmState& state, const Network& net, int i) {
  double s = 0.0;
  for (const auto& [k, w] : net.neighbors(i)) {
    const int e = net.edge_index(i, k);
    const int side = side_of(net, e, i);
    s += state.rho * state.copies[e][side][0] - state.duals[e][side][0];
  }
  return s;
}

}  // namespace

AdmmState admm_init(const Network& net, const LossList& losses, double rho,
                    const InitPolicy& policy) {
  check_losses(net, losses);
  if (!std::isfinite(rho) || rho <= 0.0) {
    throw NonpositiveRho("rho must be positive, got " + std::to_string(rho));
  }
  const int n = net.num_agents();
  const int p = net.dim();

  std::vector<Eigen::VectorXd> start(n);
  switch (policy.kind) {
    case InitPolicy::Kind::Zeros:
    case InitPolicy::Kind::Constant: {
      const double c =
          policy.kind == InitPolicy::Kind::Constant ? policy.constant : 0.0;
      if (!std::isfinite(c)) {
        throw NonFiniteInput("init constant must be finite");
      }
      for (auto& v : start) v = Eigen::VectorXd::Constant(p, c);
      break;
    }
    case InitPolicy::Kind::PerAgent: {
      if (static_cast<int>(policy.per_agent.size()) != n) {
        throw DimensionMismatch("per-agent init needs " + std::to_string(n) +
                                " vectors, got " +
                                std::to_string(policy.per_agent.size()));
      }
      for (int i = 0; i < n; ++i) {
        if (policy.per_agent[i].size() != p) {
          throw DimensionMismatch("per-agent init vector of dimension " +
                                  std::to_string(policy.per_agent[i].size()) +
                                  ", expected " + std::to_string(p));
        }
        if (!policy.per_agent[i].allFinite()) {
          throw NonFiniteInput("per-agent init vector has non-finite entries");
        }
        start[i] = policy.per_agent[i];
      }
      break;
    }
    case InitPolicy::Kind::PerPair:
      throw DimensionMismatch(
          "per-pair initialization applies to gossip tables, not the ADMM "
          "baseline");
  }

  AdmmState state;
  state.rho = rho;
  state.round = 0;
  state.theta = std::move(start);
  state.copies.resize(net.num_edges());
  state.duals.resize(net.num_edges());
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p);
  for (int e = 0; e < net.num_edges(); ++e) {
    const Edge& ed = net.edges()[e];
    state.copies[e] = {state.theta[ed.i], state.theta[ed.j]};
    state.duals[e] = {zero, zero};
  }
  return state;
}

const Eigen::VectorXd& admm_copy(const AdmmState& state, const Network& net,
                                 int i, int j) {
  check_state_shape(state, net);
  const int e = net.edge_index(i, j);
  return state.copies[e][side_of(net, e, i)];
}

const Eigen::VectorXd& admm_dual(const AdmmState& state, const Network& net,
                                 int i, int j) {
  check_state_shape(state, net);
  const int e = net.edge_index(i, j);
  return state.duals[e][side_of(net, e, i)];
}

void admm_round(AdmmState& state, const Network& net, const LossList& losses,
                const Edge& edge) {
  check_state_shape(state, net);
  check_losses(net, losses);
  const int e = net.edge_index(edge.i, edge.j);
  const int i = net.edges()[e].i;
  const int j = net.edges()[e].j;
  const double rho = state.rho;
  const double w = net.edge_weight(e);

  state.theta[i] = resolvent(*losses[i], rho * net.degree(i),
                             penalty_sum(state, net, i));
  state.theta[j] = resolvent(*losses[j], rho * net.degree(j),
                             penalty_sum(state, net, j));

  // Joint minimizer of 1/2 W ||z_ij - z_ji||^2 + u_ij.(theta_i - z_ij)
  // + rho/2 ||theta_i - z_ij||^2 + (same for j); a 2x2 system per coordinate.
  const Eigen::VectorXd a = state.theta[i] + state.duals[e][0] / rho;
  const Eigen::VectorXd b = state.theta[j] + state.duals[e][1] / rho;
  state.copies[e][0] = ((w + rho) * a + w * b) / (rho + 2.0 * w);
  state.copies[e][1] = (w * a + (w + rho) * b) / (rho + 2.0 * w);

  state.duals[e][0] += rho * (state.theta[i] - state.copies[e][0]);
  state.duals[e][1] += rho * (state.theta[j] - state.copies[e][1]);
  ++state.round;
}

double admm_feasibility(const AdmmState& state, const Network& net) {
  check_state_shape(state, net);
  double gap = 0.0;
  for (int e = 0; e < net.num_edges(); ++e) {
    const Edge& ed = net.edges()[e];
    gap = std::max(gap, (state.theta[ed.i] - state.copies[e][0]).norm());
    gap = std::max(gap, (state.theta[ed.j] - state.copies[e][1]).norm());
  }
  return gap;
}

Trace run_admm(AdmmState& state, const Network& net, const LossList& losses,
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
  const bool scalar = net.dim() == 1;
  bool with_rel = theta_star != nullptr;
  std::vector<double> norm_star;
  if (theta_star) {
    if (static_cast<int>(theta_star->size()) != n) {
      throw DimensionMismatch("reference solution has " +
                              std::to_string(theta_star->size()) +
                              " components for " + std::to_string(n) +
                              " agents");
    }
    norm_star.resize(n);
    for (int i = 0; i < n; ++i) {
      if ((*theta_star)[i].size() != net.dim()) {
        throw DimensionMismatch("reference component of wrong dimension");
      }
      norm_star[i] = (*theta_star)[i].norm();
      if (norm_star[i] == 0.0) with_rel = false;
    }
  }

  std::vector<double> rel;
  if (with_rel) {
    rel.resize(n);
    for (int i = 0; i < n; ++i) {
      rel[i] = (state.theta[i] - (*theta_star)[i]).norm() / norm_star[i];
    }
  }

  const double rho = state.rho;
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

    if (scalar) {
      const double w = net.edge_weight(eidx);
      const double ti = resolvent1(*losses[i], rho * net.degree(i),
                                   penalty_sum1(state, net, i));
      const double tj = resolvent1(*losses[j], rho * net.degree(j),
                                   penalty_sum1(state, net, j));
      state.theta[i][0] = ti;
      state.theta[j][0] = tj;
      const double a = ti + state.duals[eidx][0][0] / rho;
      const double b = tj + state.duals[eidx][1][0] / rho;
      const double zi = ((w + rho) * a + w * b) / (rho + 2.0 * w);
      const double zj = (w * a + (w + rho) * b) / (rho + 2.0 * w);
      state.copies[eidx][0][0] = zi;
      state.copies[eidx][1][0] = zj;
      state.duals[eidx][0][0] += rho * (ti - zi);
      state.duals[eidx][1][0] += rho * (tj - zj);
      ++state.round;
    } else {
      admm_round(state, net, losses, e);
    }

    TraceRow row;
    row.round = state.round;
    row.edge_i = i;
    row.edge_j = j;
    row.v = kNaN;
    row.mean_rel_error = kNaN;

    if (with_rel) {
      rel[i] = (state.theta[i] - (*theta_star)[i]).norm() / norm_star[i];
      rel[j] = (state.theta[j] - (*theta_star)[j]).norm() / norm_star[j];
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

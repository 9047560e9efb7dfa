#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "djam/admm.hpp"
#include "djam/errors.hpp"
#include "djam/gossip.hpp"
#include "djam/losses.hpp"
#include "djam/network.hpp"
#include "djam/oracle.hpp"
#include "djam/rng.hpp"

using namespace djam;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd scalar_vec(double v) {
  VectorXd x(1);
  x[0] = v;
  return x;
}

LossPtr quad1(double a, double y) {
  MatrixXd am(1, 1);
  am << a;
  return std::make_shared<QuadraticLoss>(am, scalar_vec(y));
}

struct TwoAgent {
  Network net = Network::build(2, 1, {{0, 1, 1.0}});
  LossList losses{quad1(1.0, 0.0), quad1(1.0, 2.0)};
};

}  // namespace

TEST_CASE("admm_init validates rho and seeds the state") {
  TwoAgent ex;
  CHECK_THROWS_AS(admm_init(ex.net, ex.losses, 0.0), NonpositiveRho);
  CHECK_THROWS_AS(admm_init(ex.net, ex.losses, -1.0), NonpositiveRho);
  CHECK_NOTHROW(admm_init(ex.net, ex.losses, 0.316));

  AdmmState state = admm_init(ex.net, ex.losses, 1.0);
  CHECK(state.rho == 1.0);
  CHECK(state.round == 0);
  CHECK(state.theta[0][0] == 0.0);
  CHECK(state.theta[1][0] == 0.0);
  CHECK(admm_copy(state, ex.net, 0, 1)[0] == 0.0);
  CHECK(admm_copy(state, ex.net, 1, 0)[0] == 0.0);
  CHECK(admm_dual(state, ex.net, 0, 1)[0] == 0.0);

  AdmmState warm = admm_init(
      ex.net, ex.losses, 1.0,
      InitPolicy::per_agent_models({scalar_vec(5.0), scalar_vec(-3.0)}));
  CHECK(warm.theta[0][0] == 5.0);
  CHECK(admm_copy(warm, ex.net, 0, 1)[0] == 5.0);
  CHECK(admm_copy(warm, ex.net, 1, 0)[0] == -3.0);
  CHECK(admm_dual(warm, ex.net, 1, 0)[0] == 0.0);
}

TEST_CASE("a KKT point is a fixed point of the activation") {
  Rng rng(7);
  std::vector<WeightedEdge> edges{{0, 1, 1.2}, {1, 2, 0.7}, {0, 2, 1.9}};
  const Network net = Network::build(3, 1, edges);
  LossList losses{quad1(1.0, 1.0), quad1(1.4, -0.5), quad1(0.9, 2.0)};
  const Solution sol = solve_exact_quadratic(net, losses);

  const double rho = 1.3;
  AdmmState state = admm_init(net, losses, rho);
  // Overwrite with the KKT point: primals and copies at theta_star, duals at
  // u_ij = W_ij (theta_star_i - theta_star_j).
  for (int i = 0; i < 3; ++i) state.theta[i] = sol.theta_star[i];
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge edge = net.edges()[e];
    const double w = net.edge_weight(static_cast<int>(e));
    state.copies[e][0] = sol.theta_star[edge.i];
    state.copies[e][1] = sol.theta_star[edge.j];
    state.duals[e][0] = w * (sol.theta_star[edge.i] - sol.theta_star[edge.j]);
    state.duals[e][1] = w * (sol.theta_star[edge.j] - sol.theta_star[edge.i]);
  }

  const AdmmState before = state;
  for (const Edge& e : net.edges()) {
    admm_round(state, net, losses, e);
  }
  for (int i = 0; i < 3; ++i) {
    CHECK((state.theta[i] - before.theta[i]).norm() <= 1e-9);
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    CHECK((state.copies[e][0] - before.copies[e][0]).norm() <= 1e-9);
    CHECK((state.copies[e][1] - before.copies[e][1]).norm() <= 1e-9);
    CHECK((state.duals[e][0] - before.duals[e][0]).norm() <= 1e-9);
    CHECK((state.duals[e][1] - before.duals[e][1]).norm() <= 1e-9);
  }
}

TEST_CASE("2-agent quadratic instance converges at rho 1") {
  TwoAgent ex;
  const Solution sol = solve_exact_quadratic(ex.net, ex.losses);
  AdmmState state = admm_init(ex.net, ex.losses, 1.0);
  for (int k = 0; k < 2000; ++k) admm_round(state, ex.net, ex.losses, {0, 1});
  CHECK((state.theta[0] - sol.theta_star[0]).norm() <= 1e-8);
  CHECK((state.theta[1] - sol.theta_star[1]).norm() <= 1e-8);
  CHECK(admm_feasibility(state, ex.net) <= 1e-8);
  CHECK(state.round == 2000);
}

TEST_CASE("dual ascent identity holds after each activation") {
  TwoAgent ex;
  AdmmState state = admm_init(ex.net, ex.losses, 0.7);
  for (int k = 0; k < 20; ++k) {
    const VectorXd u01 = admm_dual(state, ex.net, 0, 1);
    const VectorXd u10 = admm_dual(state, ex.net, 1, 0);
    admm_round(state, ex.net, ex.losses, {0, 1});
    const VectorXd expect01 =
        u01 + state.rho * (state.theta[0] - admm_copy(state, ex.net, 0, 1));
    const VectorXd expect10 =
        u10 + state.rho * (state.theta[1] - admm_copy(state, ex.net, 1, 0));
    CHECK((admm_dual(state, ex.net, 0, 1) - expect01).norm() <= 1e-14);
    CHECK((admm_dual(state, ex.net, 1, 0) - expect10).norm() <= 1e-14);
  }
}

TEST_CASE("unknown edges and bad indices are rejected") {
  const Network tri =
      Network::build(3, 1, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
  LossList losses{quad1(1.0, 0.0), quad1(1.0, 1.0), quad1(1.0, 2.0)};
  AdmmState state = admm_init(tri, losses, 1.0);
  CHECK_THROWS_AS(admm_round(state, tri, losses, {0, 0}), UnknownEdge);
  CHECK_THROWS_AS(admm_copy(state, tri, 0, 0), UnknownEdge);
}

TEST_CASE("run_admm is deterministic and tracks relative error") {
  const Network tri =
      Network::build(3, 1, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
  LossList losses{quad1(1.0, 1.0), quad1(1.0, 2.0), quad1(1.0, 3.0)};
  const Solution sol = solve_exact_quadratic(tri, losses);
  const Schedule sched = Schedule::uniform(tri, 9001);

  AdmmState s1 = admm_init(tri, losses, 1.0);
  AdmmState s2 = admm_init(tri, losses, 1.0);
  const Trace t1 = run_admm(s1, tri, losses, sched, 300, &sol.theta_star);
  const Trace t2 = run_admm(s2, tri, losses, sched, 300, &sol.theta_star);
  REQUIRE(t1.rows.size() == 300);
  for (std::size_t r = 0; r < t1.rows.size(); ++r) {
    CHECK(t1.rows[r].edge_i == t2.rows[r].edge_i);
    CHECK(t1.rows[r].mean_rel_error == t2.rows[r].mean_rel_error);
    CHECK(std::isnan(t1.rows[r].v));  // V is DJAM-specific
  }
  CHECK(t1.rows.back().mean_rel_error < t1.rows.front().mean_rel_error);

  // Mean relative error of the final state matches a direct recomputation.
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) {
    acc += (s1.theta[i] - sol.theta_star[i]).norm() / sol.theta_star[i].norm();
  }
  CHECK(t1.rows.back().mean_rel_error == doctest::Approx(acc / 3.0).epsilon(1e-12));

  // Same stream of edges as the gossip scheduler would draw.
  Rng replay(sched.seed());
  for (std::size_t r = 0; r < t1.rows.size(); ++r) {
    const Edge e = draw_edge(sched, replay);
    CHECK(t1.rows[r].edge_i == e.i);
    CHECK(t1.rows[r].edge_j == e.j);
  }
}

TEST_CASE("run_admm with zero rounds changes nothing") {
  TwoAgent ex;
  AdmmState state = admm_init(ex.net, ex.losses, 1.0);
  const Trace t =
      run_admm(state, ex.net, ex.losses, Schedule::uniform(ex.net, 3), 0);
  CHECK(t.rows.empty());
  CHECK(state.round == 0);
}

TEST_CASE("admm converges across the rho sweep on a huber instance") {
  Rng rng(113);
  std::vector<WeightedEdge> edges{
      {0, 1, 1.1}, {1, 2, 0.9}, {2, 3, 1.3}, {3, 4, 0.8}, {0, 4, 1.0}, {1, 3, 0.6}};
  const Network net = Network::build(5, 1, edges);
  LossList losses;
  for (int i = 0; i < 5; ++i) {
    losses.push_back(std::make_shared<HuberFieldLoss>(rng.uniform(-2.0, 2.0),
                                                      rng.uniform(0.8, 1.5),
                                                      0.3));
  }
  const Solution sol = solve_sync_jacobi(net, losses, 1e-13, 1000000);

  for (double rho : {0.1, 1.0, 10.0}) {
    AdmmState state = admm_init(net, losses, rho);
    const Schedule sched = Schedule::uniform(net, 555);
    run_admm(state, net, losses, sched, 30000);
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      worst = std::max(worst, (state.theta[i] - sol.theta_star[i]).norm());
    }
    CAPTURE(rho);
    CHECK(worst <= 1e-6);
    CHECK(admm_feasibility(state, net) <= 1e-6);
  }
}

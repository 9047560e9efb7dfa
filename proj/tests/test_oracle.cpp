#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "djam/errors.hpp"
#include "djam/gossip.hpp"
#include "djam/losses.hpp"
#include "djam/network.hpp"
#include "djam/oracle.hpp"
#include "djam/rng.hpp"
#include "oracles.hpp"

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

MatrixXd random_spd(int p, Rng& rng) {
  MatrixXd b(p, p);
  for (int r = 0; r < p; ++r)
    for (int c = 0; c < p; ++c) b(r, c) = rng.uniform(-1.0, 1.0);
  MatrixXd a = b.transpose() * b;
  a.diagonal().array() += 0.3;
  return a;
}

VectorXd random_vec(int p, Rng& rng, double scale = 2.0) {
  VectorXd v(p);
  for (int c = 0; c < p; ++c) v[c] = rng.uniform(-scale, scale);
  return v;
}

Network random_connected(Rng& rng, int n, int dim, double chord_prob = 0.4) {
  std::vector<WeightedEdge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, rng.uniform(0.4, 1.6)});
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j < n; ++j)
      if (rng.uniform() < chord_prob) edges.push_back({i, j, rng.uniform(0.4, 1.6)});
  return Network::build(n, dim, edges);
}

}  // namespace

TEST_CASE("exact solver reproduces the frozen 2-agent values") {
  const Network net = Network::build(2, 1, {{0, 1, 1.0}});
  const LossList losses{quad1(1.0, 0.0), quad1(1.0, 2.0)};
  const Solution sol = solve_exact_quadratic(net, losses);
  // First-order conditions 2a - b = 0, 2b - a = 2 give (2/3, 4/3).
  CHECK(sol.theta_star[0][0] == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  CHECK(sol.theta_star[1][0] == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
  CHECK(sol.residual <= 1e-12);
  CHECK(sol.sweeps == 0);
}

TEST_CASE("exact solver degenerate and symmetric instances") {
  const Network solo = Network::build(1, 1, {});
  const Solution s1 = solve_exact_quadratic(solo, {quad1(1.0, 7.0)});
  CHECK(s1.theta_star[0][0] == doctest::Approx(7.0).epsilon(1e-14));

  // Identical losses at both ends: consensus at the shared center.
  const Network pair = Network::build(2, 1, {{0, 1, 2.0}});
  const Solution s2 =
      solve_exact_quadratic(pair, {quad1(1.5, 3.0), quad1(1.5, 3.0)});
  CHECK(s2.theta_star[0][0] == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(s2.theta_star[1][0] == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("exact solver rejects non-quadratic losses") {
  const Network net = Network::build(2, 1, {{0, 1, 1.0}});
  LossList losses{quad1(1.0, 0.0),
                  std::make_shared<HuberFieldLoss>(0.0, 1.0, 1.0)};
  CHECK_THROWS_AS(solve_exact_quadratic(net, losses), NotQuadratic);
}

TEST_CASE("exact solution satisfies an independently assembled system") {
  Rng rng(83);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 5.0);
    const int p = 1 + static_cast<int>(rng.uniform() * 3.0);
    const Network net = random_connected(rng, n, p);
    LossList losses;
    std::vector<MatrixXd> a(n);
    std::vector<VectorXd> y(n);
    for (int i = 0; i < n; ++i) {
      a[i] = random_spd(p, rng);
      y[i] = random_vec(p, rng);
      losses.push_back(std::make_shared<QuadraticLoss>(a[i], y[i]));
    }
    const Solution sol = solve_exact_quadratic(net, losses);

    // Rebuild the stacked first-order system from scratch.
    MatrixXd big = MatrixXd::Zero(n * p, n * p);
    VectorXd rhs = VectorXd::Zero(n * p);
    for (int j = 0; j < n; ++j) {
      big.block(j * p, j * p, p, p) = a[j];
      big.block(j * p, j * p, p, p).diagonal().array() +=
          net.agent_weight_sum(j);
      rhs.segment(j * p, p) = a[j] * y[j];
      for (const auto& [k, w] : net.neighbors(j)) {
        big.block(j * p, k * p, p, p).diagonal().array() -= w;
      }
    }
    CHECK((big - big.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(big, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > 0.0);

    VectorXd stacked(n * p);
    for (int j = 0; j < n; ++j) stacked.segment(j * p, p) = sol.theta_star[j];
    CHECK((big * stacked - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    CHECK(sol.residual <= 1e-12 * (1.0 + rhs.norm()));
    CHECK(fixed_point_residual(sol.theta_star, net, losses) ==
          doctest::Approx(sol.residual));
  }
}

TEST_CASE("jacobi agrees with the direct solver on quadratic instances") {
  Rng rng(89);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 6.0);
    const Network net = random_connected(rng, n, 1);
    LossList losses;
    for (int i = 0; i < n; ++i)
      losses.push_back(quad1(rng.uniform(0.5, 2.0), rng.uniform(-2.0, 2.0)));
    const Solution exact = solve_exact_quadratic(net, losses);
    const Solution jac = solve_sync_jacobi(net, losses, 1e-13, 1000000);
    for (int i = 0; i < n; ++i) {
      CHECK((exact.theta_star[i] - jac.theta_star[i]).norm() <= 1e-11);
    }
    CHECK(jac.residual <= 1e-13);
    CHECK(jac.sweeps >= 1);
  }
}

TEST_CASE("one jacobi sweep from the fixed point stays put") {
  Rng rng(97);
  const Network net = random_connected(rng, 5, 1);
  LossList losses;
  for (int i = 0; i < 5; ++i)
    losses.push_back(quad1(rng.uniform(0.5, 2.0), rng.uniform(-2.0, 2.0)));
  const Solution sol = solve_exact_quadratic(net, losses);

  // Apply the synchronous map once, by hand, at theta_star.
  for (int j = 0; j < 5; ++j) {
    VectorXd s = VectorXd::Zero(1);
    for (const auto& [k, w] : net.neighbors(j)) s += w * sol.theta_star[k];
    const VectorXd next = resolvent(*losses[j], net.agent_weight_sum(j), s);
    CHECK((next - sol.theta_star[j]).norm() <= 1e-11);
  }
}

TEST_CASE("jacobi solves a huber path and certifies its own residual") {
  const int n = 5;
  std::vector<WeightedEdge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  const Network net = Network::build(n, 1, edges);
  LossList losses;
  const double ys[n] = {2.0, -1.0, 0.5, 3.0, -2.5};
  for (int i = 0; i < n; ++i)
    losses.push_back(std::make_shared<HuberFieldLoss>(ys[i], 1.0, 0.3));

  const double tol = 1e-11;
  const Solution sol = solve_sync_jacobi(net, losses, tol, 1000000);
  CHECK(sol.residual <= tol);
  CHECK(fixed_point_residual(sol.theta_star, net, losses) <= tol);
  CHECK(sol.residual ==
        doctest::Approx(testref::brute_force_residual(sol.theta_star, net, losses))
            .epsilon(1e-12));
}

TEST_CASE("jacobi sweeps contract toward the exact solution") {
  Rng rng(101);
  const Network net = random_connected(rng, 6, 1);
  LossList losses;
  for (int i = 0; i < 6; ++i)
    losses.push_back(quad1(rng.uniform(0.5, 2.0), rng.uniform(-2.0, 2.0)));
  const Solution exact = solve_exact_quadratic(net, losses);
  const double beta = contraction_factor(net, losses);

  // Hand-rolled sweeps; error contracts by at least beta each time.
  std::vector<VectorXd> theta(6, VectorXd::Zero(1));
  auto err = [&] {
    double e = 0.0;
    for (int i = 0; i < 6; ++i)
      e = std::max(e, (theta[i] - exact.theta_star[i]).norm());
    return e;
  };
  double prev = err();
  for (int sweep = 0; sweep < 30; ++sweep) {
    std::vector<VectorXd> next(6);
    for (int j = 0; j < 6; ++j) {
      VectorXd s = VectorXd::Zero(1);
      for (const auto& [k, w] : net.neighbors(j)) s += w * theta[k];
      next[j] = resolvent(*losses[j], net.agent_weight_sum(j), s);
    }
    theta = std::move(next);
    const double cur = err();
    CHECK(cur <= beta * prev + 1e-11);
    prev = cur;
  }
}

TEST_CASE("fixed_point_residual matches the examples and brute force") {
  const Network net = Network::build(2, 1, {{0, 1, 1.0}});
  const LossList losses{quad1(1.0, 0.0), quad1(1.0, 2.0)};

  // At zeros: agent 2's block reads |A(0 - 2)| = 2.
  std::vector<VectorXd> zeros(2, VectorXd::Zero(1));
  CHECK(fixed_point_residual(zeros, net, losses) == doctest::Approx(2.0));

  const Solution sol = solve_exact_quadratic(net, losses);
  CHECK(fixed_point_residual(sol.theta_star, net, losses) <= 1e-12);

  Rng rng(103);
  const Network rnd = random_connected(rng, 5, 2);
  LossList rls;
  for (int i = 0; i < 5; ++i)
    rls.push_back(std::make_shared<QuadraticLoss>(random_spd(2, rng),
                                                  random_vec(2, rng)));
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<VectorXd> pt;
    for (int i = 0; i < 5; ++i) pt.push_back(random_vec(2, rng));
    CHECK(fixed_point_residual(pt, rnd, rls) ==
          doctest::Approx(testref::brute_force_residual(pt, rnd, rls))
              .epsilon(1e-12));
  }
}

TEST_CASE("jacobi enforces its sweep budget and input checks") {
  const Network net = Network::build(2, 1, {{0, 1, 1.0}});
  const LossList losses{quad1(1.0, 0.0), quad1(1.0, 2.0)};
  CHECK_THROWS_AS(solve_sync_jacobi(net, losses, 1e-13, 2), MaxSweepsExceeded);
  CHECK_THROWS_AS(solve_sync_jacobi(net, losses, 0.0, 100), Error);
  CHECK_THROWS_AS(solve_sync_jacobi(net, losses, 1e-10, 0), MaxSweepsExceeded);
}

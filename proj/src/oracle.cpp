#include "djam/oracle.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <string>

#include "djam/errors.hpp"
#include "djam/gossip.hpp"

namespace djam {

namespace {

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

void check_theta(const std::vector<Eigen::VectorXd>& theta,
                 const Network& net) {
  if (static_cast<int>(theta.size()) != net.num_agents()) {
    throw DimensionMismatch("theta has " + std::to_string(theta.size()) +
                            " components for " +
                            std::to_string(net.num_agents()) + " agents");
  }
  for (const auto& v : theta) {
    if (v.size() != net.dim()) {
      throw DimensionMismatch("theta component of dimension " +
                              std::to_string(v.size()) + ", expected " +
                              std::to_string(net.dim()));
    }
  }
}

}  // namespace

Solution solve_exact_quadratic(const Network& net, const LossList& losses) {
  check_losses(net, losses);
  const int n = net.num_agents();
  const int p = net.dim();

  std::vector<const QuadraticLoss*> quads(n);
  for (int j = 0; j < n; ++j) {
    quads[j] = dynamic_cast<const QuadraticLoss*>(losses[j].get());
    if (!quads[j]) {
      throw NotQuadratic("loss of agent " + std::to_string(j) +
                         " is not quadratic");
    }
  }

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n * p, n * p);
  Eigen::VectorXd rhs(n * p);
  for (int j = 0; j < n; ++j) {
    K.block(j * p, j * p, p, p) = quads[j]->A();
    K.block(j * p, j * p, p, p).diagonal().array() += net.agent_weight_sum(j);
    for (const auto& [k, wjk] : net.neighbors(j)) {
      K.block(j * p, k * p, p, p).diagonal().array() -= wjk;
    }
    rhs.segment(j * p, p) = quads[j]->A() * quads[j]->y();
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
  if (ldlt.info() != Eigen::Success) {
    throw LinearSolveFailure("factorization of the coupled quadratic system failed");
  }
  Eigen::VectorXd x = ldlt.solve(rhs);
  x += ldlt.solve(rhs - K * x);  // one refinement pass

  const double lin_residual = (K * x - rhs).norm();
  if (!(lin_residual <= 1e-13 * (1.0 + rhs.norm()))) {
    throw LinearSolveFailure("linear residual " + std::to_string(lin_residual) +
                             " exceeds 1e-13 * (1 + ||rhs||)");
  }

  Solution sol;
  sol.theta_star.reserve(n);
  for (int j = 0; j < n; ++j) {
    sol.theta_star.push_back(x.segment(j * p, p));
  }
  sol.residual = fixed_point_residual(sol.theta_star, net, losses);
  sol.sweeps = 0;
  return sol;
}

Solution solve_sync_jacobi(const Network& net, const LossList& losses,
                           double tol, long long max_sweeps) {
  check_losses(net, losses);
  if (!(tol > 0.0) || !std::isfinite(tol)) {
    throw Error("solve_sync_jacobi: tol must be positive, got " +
                std::to_string(tol));
  }
  if (max_sweeps < 1) {
    throw MaxSweepsExceeded("solve_sync_jacobi: max_sweeps must be >= 1");
  }
  const int n = net.num_agents();
  const int p = net.dim();
  const double beta = contraction_factor(net, losses);
  // Inner solves must land below the requested residual; keep a floor above
  // roundoff so Newton can actually reach it.
  const double inner_tol = std::max(std::min(kResolventTol, 0.1 * tol), 1e-15);

  std::vector<Eigen::VectorXd> theta(n, Eigen::VectorXd::Zero(p));
  std::vector<Eigen::VectorXd> next(n);

  Solution sol;
  for (long long sweep = 1; sweep <= max_sweeps; ++sweep) {
    double delta = 0.0;
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd s = Eigen::VectorXd::Zero(p);
      for (const auto& [k, wjk] : net.neighbors(j)) {
        s += wjk * theta[k];
      }
      next[j] = resolvent(*losses[j], net.agent_weight_sum(j), s, inner_tol);
      delta = std::max(delta, (next[j] - theta[j]).norm());
    }
    theta.swap(next);
    if (delta * beta <= tol * (1.0 - beta)) {
      const double res = fixed_point_residual(theta, net, losses);
      if (res <= tol) {
        sol.theta_star = std::move(theta);
        sol.residual = res;
        sol.sweeps = sweep;
        return sol;
      }
    }
  }
  throw MaxSweepsExceeded("synchronous solver did not reach tolerance " +
                          std::to_string(tol) + " in " +
                          std::to_string(max_sweeps) + " sweeps");
}

double fixed_point_residual(const std::vector<Eigen::VectorXd>& theta,
                            const Network& net, const LossList& losses) {
  check_losses(net, losses);
  check_theta(theta, net);
  double res = 0.0;
  for (int j = 0; j < net.num_agents(); ++j) {
    Eigen::VectorXd r = losses[j]->grad(theta[j]);
    for (const auto& [k, wjk] : net.neighbors(j)) {
      r += wjk * (theta[j] - theta[k]);
    }
    res = std::max(res, r.norm());
  }
  return res;
}

}  // namespace djam

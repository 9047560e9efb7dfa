#pragma once

#include <Eigen/Core>
#include <vector>

#include "djam/losses.hpp"
#include "djam/network.hpp"

namespace djam {

/// Reference solution of the coupled problem
///   min sum_j f_j(theta_j) + 1/2 sum_{(j,k) in E} W_jk ||theta_j - theta_k||^2.
/// `residual` is the achieved block-wise first-order-condition residual
/// (see fixed_point_residual); `sweeps` counts iterations for the Jacobi
/// solver and is 0 for the direct solver.
struct Solution {
  std::vector<Eigen::VectorXd> theta_star;
  double residual = 0.0;
  long long sweeps = 0;
};

/// Direct solver for all-quadratic losses: assembles the symmetric positive
/// definite linear system of the first-order conditions
///   sum_k W_jk (theta_j - theta_k) + A_j (theta_j - y_j) = 0
/// and solves it with a dense factorization plus one refinement pass.
/// Linear-system residual at return is <= 1e-13 (1 + ||rhs||).
Solution solve_exact_quadratic(const Network& net, const LossList& losses);

/// General-loss reference: iterates the synchronous full-update map
///   theta_j <- resolvent(f_j, w_j, sum_k W_jk theta_k)   (all j at once)
/// from zeros. The map contracts with factor beta = contraction_factor, so
/// iteration stops once the geometric tail bound delta * beta / (1 - beta)
/// and the fixed-point residual are both <= tol.
Solution solve_sync_jacobi(const Network& net, const LossList& losses,
                           double tol, long long max_sweeps);

/// max_j || sum_k W_jk (theta_j - theta_k) + grad f_j(theta_j) ||, the
/// block-wise first-order condition; zero exactly at the solution.
double fixed_point_residual(const std::vector<Eigen::VectorXd>& theta,
                            const Network& net, const LossList& losses);

}  // namespace djam

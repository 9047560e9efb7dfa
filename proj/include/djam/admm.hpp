#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

#include "djam/gossip.hpp"
#include "djam/losses.hpp"
#include "djam/network.hpp"

namespace djam {

/// Asynchronous pairwise ADMM baseline. The coupled problem is split with
/// one copy of each endpoint's model per edge:
///   min sum_i f_i(theta_i) + sum_{(i,j) in E} 1/2 W_ij ||z_ij - z_ji||^2
///   s.t. theta_i = z_ij and theta_j = z_ji for every edge (i, j),
/// with dual vectors u_ij and penalty parameter rho. One activation of edge
/// (i, j) performs a Gauss-Seidel pass over that edge's variables; the
/// copies and duals of other edges are untouched.
///
/// copies[e][0] / duals[e][0] belong to the lower-indexed endpoint of edge
/// e (the copy of theta_i for e = (i, j), i < j); slot 1 to the other.
struct AdmmState {
  std::vector<Eigen::VectorXd> theta;
  std::vector<std::array<Eigen::VectorXd, 2>> copies;
  std::vector<std::array<Eigen::VectorXd, 2>> duals;
  double rho = 1.0;
  long long round = 0;
};

/// Primals and copies start per policy (default zeros; per-agent vectors set
/// theta_i and every copy of theta_i alike); duals start at zero.
AdmmState admm_init(const Network& net, const LossList& losses, double rho,
                    const InitPolicy& policy = InitPolicy::zeros());

/// The copy of theta_i held for edge (i, j) and its dual.
const Eigen::VectorXd& admm_copy(const AdmmState& state, const Network& net,
                                 int i, int j);
const Eigen::VectorXd& admm_dual(const AdmmState& state, const Network& net,
                                 int i, int j);

/// One activation of edge (i, j):
///   1. theta_i <- resolvent(f_i, rho deg_i, sum_k (rho z_ik - u_ik)), and
///      the same for theta_j (penalties run over all incident copies so the
///      optimum of the coupled problem is an exact fixed point);
///   2. the activated edge's copy pair (z_ij, z_ji) <- closed-form minimizer
///      of 1/2 W ||z_ij - z_ji||^2 plus the two consensus penalty terms;
///   3. dual ascent u_ij += rho (theta_i - z_ij), u_ji += rho (theta_j - z_ji).
void admm_round(AdmmState& state, const Network& net, const LossList& losses,
                const Edge& edge);

/// Runs `rounds` activations of draw + admm_round with a generator seeded
/// from the schedule. Rows carry the mean relative error of theta versus
/// theta_star when supplied (V is not defined for this baseline and stays
/// empty).
Trace run_admm(AdmmState& state, const Network& net, const LossList& losses,
               const Schedule& sched, long long rounds,
               const std::vector<Eigen::VectorXd>* theta_star = nullptr);

/// max over directed edge copies of ||theta_i - z_ij|| (primal feasibility).
double admm_feasibility(const AdmmState& state, const Network& net);

}  // namespace djam

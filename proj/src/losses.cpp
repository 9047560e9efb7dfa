#include "djam/losses.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "djam/errors.hpp"

namespace djam {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kArmijoSlope = 1e-4;

std::string dim_msg(const char* what, long got, long want) {
  return std::string(what) + ": got dimension " + std::to_string(got) +
         ", expected " + std::to_string(want);
}

}  // namespace

double PersonalLoss::eval1(double theta) const {
  Eigen::VectorXd v(1);
  v[0] = theta;
  return eval(v);
}

double PersonalLoss::grad1(double theta) const {
  Eigen::VectorXd v(1);
  v[0] = theta;
  return grad(v)[0];
}

double PersonalLoss::hess1(double theta) const {
  Eigen::VectorXd v(1);
  v[0] = theta;
  return hess(v)(0, 0);
}

QuadraticLoss::QuadraticLoss(Eigen::MatrixXd A, Eigen::VectorXd y)
    : A_(std::move(A)), y_(std::move(y)) {
  if (y_.size() < 1 || A_.rows() != y_.size() || A_.cols() != y_.size()) {
    throw DimensionMismatch("quadratic loss: A must be p x p matching y, got " +
                            std::to_string(A_.rows()) + "x" +
                            std::to_string(A_.cols()) + " with p = " +
                            std::to_string(y_.size()));
  }
  if (!A_.allFinite() || !y_.allFinite()) {
    throw NonFiniteInput("quadratic loss: A and y must be finite");
  }
  const double scale = std::max(1.0, A_.cwiseAbs().maxCoeff());
  if ((A_ - A_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error("quadratic loss: A must be symmetric");
  }
  if (y_.size() == 1) {
    m_ = big_m_ = A_(0, 0);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A_,
                                                      Eigen::EigenvaluesOnly);
    m_ = es.eigenvalues().minCoeff();
    big_m_ = es.eigenvalues().maxCoeff();
  }
  if (m_ <= 0.0) {
    throw Error("quadratic loss: A must be positive definite (min eigenvalue " +
                std::to_string(m_) + ")");
  }
}

double QuadraticLoss::eval(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd d = theta - y_;
  return 0.5 * d.dot(A_ * d);
}

Eigen::VectorXd QuadraticLoss::grad(const Eigen::VectorXd& theta) const {
  return A_ * (theta - y_);
}

Eigen::MatrixXd QuadraticLoss::hess(const Eigen::VectorXd&) const {
  return A_;
}

double QuadraticLoss::eval1(double theta) const {
  const double d = theta - y_[0];
  return 0.5 * A_(0, 0) * d * d;
}

double QuadraticLoss::grad1(double theta) const {
  return A_(0, 0) * (theta - y_[0]);
}

double QuadraticLoss::hess1(double) const { return A_(0, 0); }

HuberFieldLoss::HuberFieldLoss(double y, double sigma, double delta)
    : y_(y), sigma_(sigma), delta_(delta) {
  if (!std::isfinite(y) || !std::isfinite(sigma) || !std::isfinite(delta)) {
    throw NonFiniteInput("huber loss: parameters must be finite");
  }
  if (sigma <= 0.0) {
    throw Error("huber loss: sigma must be positive, got " +
                std::to_string(sigma));
  }
  if (delta <= 0.0) {
    throw Error("huber loss: delta must be positive, got " +
                std::to_string(delta));
  }
}

double HuberFieldLoss::eval1(double theta) const {
  const double r = y_ - theta;
  const double a = std::abs(r);
  const double phi = a <= delta_ ? 0.5 * r * r : delta_ * (a - 0.5 * delta_);
  return phi + 0.5 * sigma_ * theta * theta;
}

double HuberFieldLoss::grad1(double theta) const {
  const double r = y_ - theta;
  const double dphi = std::clamp(r, -delta_, delta_);
  return -dphi + sigma_ * theta;
}

double HuberFieldLoss::hess1(double theta) const {
  // Curvature 1 on the closed interval |r| <= delta; any choice at the
  // measure-zero kinks leaves the root unchanged.
  return (std::abs(y_ - theta) <= delta_ ? 1.0 : 0.0) + sigma_;
}

double HuberFieldLoss::eval(const Eigen::VectorXd& theta) const {
  return eval1(theta[0]);
}

Eigen::VectorXd HuberFieldLoss::grad(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd g(1);
  g[0] = grad1(theta[0]);
  return g;
}

Eigen::MatrixXd HuberFieldLoss::hess(const Eigen::VectorXd& theta) const {
  Eigen::MatrixXd h(1, 1);
  h(0, 0) = hess1(theta[0]);
  return h;
}

double loss_eval(const PersonalLoss& loss, const Eigen::VectorXd& theta) {
  if (theta.size() != loss.dim()) {
    throw DimensionMismatch(dim_msg("loss_eval", theta.size(), loss.dim()));
  }
  if (!theta.allFinite()) {
    throw NonFiniteInput("loss_eval: theta has non-finite entries");
  }
  return loss.eval(theta);
}

Eigen::VectorXd loss_grad(const PersonalLoss& loss,
                          const Eigen::VectorXd& theta) {
  if (theta.size() != loss.dim()) {
    throw DimensionMismatch(dim_msg("loss_grad", theta.size(), loss.dim()));
  }
  if (!theta.allFinite()) {
    throw NonFiniteInput("loss_grad: theta has non-finite entries");
  }
  return loss.grad(theta);
}

double resolvent1(const PersonalLoss& loss, double w, double s,
                  double tol_rel) {
  const double tol = tol_rel * std::max(1.0, std::abs(s));
  const double mw = loss.strong_convexity() + w;
  double x = 0.0;
  double r = loss.grad1(x) + w * x - s;
  if (std::abs(r) <= tol) return x;
  // The root satisfies |x* - x| <= |r|/(m + w); keep it bracketed and fall
  // back to bisection whenever the Newton step leaves the bracket.
  double lo, hi;
  if (r > 0.0) {
    lo = x - r / mw;
    hi = x;
  } else {
    lo = x;
    hi = x - r / mw;
  }
  bool force_bisect = false;
  for (int it = 0; it < kMaxIterations; ++it) {
    const double h = loss.hess1(x) + w;
    double xn = x - r / h;
    if (force_bisect || !(xn >= lo && xn <= hi)) xn = 0.5 * (lo + hi);
    x = xn;
    const double prev_abs_r = std::abs(r);
    r = loss.grad1(x) + w * x - s;
    if (std::abs(r) <= tol) return x;
    // A Newton step that fails to reduce the residual can cycle between the
    // two endpoints on piecewise-linear gradients; bisect to force progress.
    force_bisect = std::abs(r) >= prev_abs_r;
    if (r > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
  }
  throw SolverDidNotConverge(
      "scalar resolvent: residual " + std::to_string(r) + " above tolerance " +
      std::to_string(tol) + " after " + std::to_string(kMaxIterations) +
      " iterations");
}

namespace {

Eigen::VectorXd resolvent_newton(const PersonalLoss& loss, double w,
                                 const Eigen::VectorXd& s, double tol_rel) {
  const int p = loss.dim();
  const double tol = tol_rel * std::max(1.0, s.norm());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd g = loss.grad(x) + w * x - s;
  for (int it = 0; it < kMaxIterations; ++it) {
    if (g.norm() <= tol) return x;
    Eigen::MatrixXd h = loss.hess(x);
    h.diagonal().array() += w;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success) {
      throw SolverDidNotConverge("resolvent: Newton system factorization failed");
    }
    const Eigen::VectorXd d = ldlt.solve(-g);
    const double slope = g.dot(d);
    // Armijo backtracking on F(x) = f(x) + w/2 ||x||^2 - s.x.
    const double f0 = loss.eval(x) + 0.5 * w * x.squaredNorm() - s.dot(x);
    double t = 1.0;
    Eigen::VectorXd xn = x + t * d;
    for (int halvings = 0; halvings < 60; ++halvings) {
      const double f1 = loss.eval(xn) + 0.5 * w * xn.squaredNorm() - s.dot(xn);
      if (f1 <= f0 + kArmijoSlope * t * slope) break;
      t *= 0.5;
      xn = x + t * d;
    }
    x = xn;
    g = loss.grad(x) + w * x - s;
  }
  if (g.norm() <= tol) return x;
  throw SolverDidNotConverge("resolvent: residual " + std::to_string(g.norm()) +
                             " above tolerance " + std::to_string(tol) +
                             " after " + std::to_string(kMaxIterations) +
                             " iterations");
}

}  // namespace

Eigen::VectorXd resolvent(const PersonalLoss& loss, double w,
                          const Eigen::VectorXd& s, double tol_rel) {
  if (s.size() != loss.dim()) {
    throw DimensionMismatch(dim_msg("resolvent", s.size(), loss.dim()));
  }
  if (!s.allFinite() || !std::isfinite(w)) {
    throw NonFiniteInput("resolvent: inputs must be finite");
  }
  if (w < 0.0) {
    throw NonpositiveWeight("resolvent: w must be nonnegative, got " +
                            std::to_string(w));
  }
  if (loss.dim() == 1) {
    Eigen::VectorXd x(1);
    x[0] = resolvent1(loss, w, s[0], tol_rel);
    return x;
  }
  return resolvent_newton(loss, w, s, tol_rel);
}

namespace {

void check_agent_losses(const Network& net, const LossList& losses, int j) {
  if (j < 0 || j >= net.num_agents()) {
    throw IndexOutOfRange("agent " + std::to_string(j) + " out of range");
  }
  if (static_cast<int>(losses.size()) != net.num_agents()) {
    throw DimensionMismatch("losses list has " +
                            std::to_string(losses.size()) + " entries for " +
                            std::to_string(net.num_agents()) + " agents");
  }
  if (!losses[j] || losses[j]->dim() != net.dim()) {
    throw DimensionMismatch("loss of agent " + std::to_string(j) +
                            " missing or of wrong dimension");
  }
}

}  // namespace

Eigen::VectorXd local_solve(const Network& net, const LossList& losses, int j,
                            const std::map<int, Eigen::VectorXd>& neighbor_models) {
  check_agent_losses(net, losses, j);
  const auto& nbrs = net.neighbors(j);
  for (const auto& [k, model] : neighbor_models) {
    if (!net.has_edge(j, k)) {
      throw UnknownEdge("model supplied for agent " + std::to_string(k) +
                        ", which is not a neighbor of " + std::to_string(j));
    }
    if (model.size() != net.dim()) {
      throw DimensionMismatch(dim_msg("local_solve neighbor model",
                                      model.size(), net.dim()));
    }
  }
  Eigen::VectorXd s = Eigen::VectorXd::Zero(net.dim());
  for (const auto& [k, wjk] : nbrs) {
    auto it = neighbor_models.find(k);
    if (it == neighbor_models.end()) {
      throw MissingNeighborModel("agent " + std::to_string(j) +
                                 " has no model for neighbor " +
                                 std::to_string(k));
    }
    s += wjk * it->second;
  }
  return resolvent(*losses[j], net.agent_weight_sum(j), s);
}

Eigen::VectorXd local_solve_row(const Network& net, const LossList& losses,
                                int j, const std::vector<Eigen::VectorXd>& row) {
  check_agent_losses(net, losses, j);
  const auto& nbrs = net.neighbors(j);
  if (row.size() != nbrs.size()) {
    throw MissingNeighborModel("agent " + std::to_string(j) + " expects " +
                               std::to_string(nbrs.size()) +
                               " neighbor models, got " +
                               std::to_string(row.size()));
  }
  Eigen::VectorXd s = Eigen::VectorXd::Zero(net.dim());
  for (std::size_t a = 0; a < nbrs.size(); ++a) {
    s += nbrs[a].second * row[a];
  }
  return resolvent(*losses[j], net.agent_weight_sum(j), s);
}

double local_solve_row1(const Network& net, const LossList& losses, int j,
                        const std::vector<double>& row) {
  const auto& nbrs = net.neighbors(j);
  double s = 0.0;
  for (std::size_t a = 0; a < nbrs.size(); ++a) {
    s += nbrs[a].second * row[a];
  }
  return resolvent1(*losses[j], net.agent_weight_sum(j), s);
}

}  // namespace djam

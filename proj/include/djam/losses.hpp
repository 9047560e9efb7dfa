#pragma once

#include <Eigen/Core>
#include <map>
#include <memory>
#include <vector>

#include "djam/network.hpp"

namespace djam {

/// Personal loss f_i of one agent: strongly convex with Lipschitz gradient.
/// Implementations are immutable and all operations are pure functions.
///
/// The declared constants m (strong convexity) and M (gradient Lipschitz)
/// satisfy for all x, y:
///   (grad(x) - grad(y))^T (x - y) >= m ||x - y||^2
///   ||grad(x) - grad(y)||         <= M ||x - y||
/// They feed diagnostics (contraction factor, property tests); the gossip
/// update itself never reads them.
class PersonalLoss {
 public:
  virtual ~PersonalLoss() = default;

  virtual int dim() const = 0;
  virtual double eval(const Eigen::VectorXd& theta) const = 0;
  virtual Eigen::VectorXd grad(const Eigen::VectorXd& theta) const = 0;
  /// Hessian (or a positive-definite surrogate at nonsmooth curvature
  /// points); drives the Newton resolvent.
  virtual Eigen::MatrixXd hess(const Eigen::VectorXd& theta) const = 0;
  virtual double strong_convexity() const = 0;
  virtual double grad_lipschitz() const = 0;

  /// Scalar fast paths for dim() == 1; bridge to the vector API by default.
  virtual double eval1(double theta) const;
  virtual double grad1(double theta) const;
  virtual double hess1(double theta) const;
};

using LossPtr = std::shared_ptr<const PersonalLoss>;
using LossList = std::vector<LossPtr>;

/// f(theta) = 1/2 (theta - y)^T A (theta - y) with A symmetric positive
/// definite. m and M are the extreme eigenvalues of A.
class QuadraticLoss : public PersonalLoss {
 public:
  QuadraticLoss(Eigen::MatrixXd A, Eigen::VectorXd y);

  int dim() const override { return static_cast<int>(y_.size()); }
  double eval(const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd grad(const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd hess(const Eigen::VectorXd& theta) const override;
  double strong_convexity() const override { return m_; }
  double grad_lipschitz() const override { return big_m_; }

  double eval1(double theta) const override;
  double grad1(double theta) const override;
  double hess1(double theta) const override;

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::VectorXd& y() const { return y_; }

 private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd y_;
  double m_ = 0.0;
  double big_m_ = 0.0;
};

/// Scalar robust field-estimation loss
///   f(theta) = phi_delta(y - theta) + 1/2 sigma theta^2
/// with the Huber penalty phi_delta(r) = 1/2 r^2 for |r| <= delta and
/// delta (|r| - delta/2) otherwise. m = sigma; M = sigma + 1 (the Huber
/// curvature lies in [0, 1], taken as 1 on the closed interval |r| <= delta).
class HuberFieldLoss : public PersonalLoss {
 public:
  HuberFieldLoss(double y, double sigma, double delta);

  int dim() const override { return 1; }
  double eval(const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd grad(const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd hess(const Eigen::VectorXd& theta) const override;
  double strong_convexity() const override { return sigma_; }
  double grad_lipschitz() const override { return sigma_ + 1.0; }

  double eval1(double theta) const override;
  double grad1(double theta) const override;
  double hess1(double theta) const override;

  double y() const { return y_; }
  double sigma() const { return sigma_; }
  double delta() const { return delta_; }

 private:
  double y_;
  double sigma_;
  double delta_;
};

/// Validating wrappers around the loss interface.
double loss_eval(const PersonalLoss& loss, const Eigen::VectorXd& theta);
Eigen::VectorXd loss_grad(const PersonalLoss& loss,
                          const Eigen::VectorXd& theta);

/// Default relative gradient-residual tolerance of the resolvent solver.
inline constexpr double kResolventTol = 1e-12;

/// Evaluates (grad F)^{-1}(s) with F(x) = f(x) + w/2 ||x||^2: the unique x
/// solving grad f(x) + w x = s. Damped Newton from x = 0; the scalar path
/// adds a bisection safeguard over the bracket |x - x*| <= |residual|/(m+w).
/// Residual at return is <= tol_rel * max(1, ||s||). The reference solvers
/// pass a tighter tol_rel; everything else uses the default.
Eigen::VectorXd resolvent(const PersonalLoss& loss, double w,
                          const Eigen::VectorXd& s,
                          double tol_rel = kResolventTol);

/// Scalar resolvent for dim() == 1 losses.
double resolvent1(const PersonalLoss& loss, double w, double s,
                  double tol_rel = kResolventTol);

/// One agent's model update given its neighbors' current models:
///   argmin_theta 1/2 sum_{k in N_j} W_jk ||theta - model_k||^2 + f_j(theta)
/// computed as resolvent(f_j, w_j, sum_k W_jk model_k). `neighbor_models`
/// must cover exactly N_j. The weighted sum accumulates in ascending
/// neighbor order (fixed so results are bit-reproducible).
Eigen::VectorXd local_solve(const Network& net, const LossList& losses, int j,
                            const std::map<int, Eigen::VectorXd>& neighbor_models);

/// Engine fast path: neighbor models given as a row aligned with
/// net.neighbors(j) order.
Eigen::VectorXd local_solve_row(const Network& net, const LossList& losses,
                                int j, const std::vector<Eigen::VectorXd>& row);

/// Scalar engine fast path (p == 1).
double local_solve_row1(const Network& net, const LossList& losses, int j,
                        const std::vector<double>& row);

}  // namespace djam

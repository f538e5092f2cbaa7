#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "splam/plam.hpp"

namespace splam {

//! Kernel estimate of the error density and its score from pseudo-errors:
//!   g(t) = b + (n a)^-1 sum_i L((t - e_i) / a),
//! with the symmetrized score phi(e) = [(g'/g)(e) - (g'/g)(-e)] / 2.
//! The floor b keeps g bounded away from zero; L defaults to the Gaussian
//! density, which has the three bounded Lipschitz derivatives the one-step
//! expansion needs. Immutable; evaluations are pure and thread-safe.
class ScoreEstimate {
public:
  ScoreEstimate(Eigen::VectorXd pseudo_errors, double a, double b,
                BaseKernel kernel = BaseKernel::gaussian());

  double g(double t) const;
  double g_prime(double t) const;
  double phi(double e) const;

  const Eigen::VectorXd& pseudo_errors() const { return errors_; }
  double a() const { return a_; }
  double b() const { return b_; }
  const BaseKernel& kernel() const { return kernel_; }

private:
  Eigen::VectorXd errors_;
  double a_;
  double b_;
  BaseKernel kernel_;
};

//! Residuals of the profile fit: Y-tilde - X-tilde' beta-hat (centered).
Eigen::VectorXd pseudo_errors(const PlamFit& fit, const Dataset& data);

//! I-hat = (n^-1 sum x-tilde x-tilde') * (n^-1 sum phi(e_i)^2).
Eigen::MatrixXd info_hat(const ScoreEstimate& score, const Eigen::Ref<const Eigen::MatrixXd>& x_tilde);

//! Checks the finite-sample analogues of the tuning-rate conditions
//!   n^{1/2} h_j b (a^2 ^ b^2) -> inf  and  a^2 / (h_j log^2 n) -> inf;
//! returns advisory warnings, never throws.
std::vector<std::string> validate_tuning(double a, double b, const Bandwidths& h,
                                         Eigen::Index n);

struct EfficientFit {
  Eigen::VectorXd beta_tilde;
  Eigen::MatrixXd info;      // I-hat
  Eigen::MatrixXd cov_beta;  // I-hat^-1 / n
  PlamFit base;              // the profile fit used for initialization
  double a = 0.0;
  double b = 0.0;
  bool a_was_auto = false;
  std::vector<std::string> warnings;
};

//! Adaptive one-step efficient estimator:
//!   beta-tilde = beta-hat - I-hat^-1 n^-1 sum_i x-tilde_i phi(e_i).
//! a defaults to the Sheather-Jones bandwidth of the pseudo-errors.
EfficientFit asam_fit(const Dataset& data, const SbfConfig& config,
                      std::optional<double> score_bandwidth = std::nullopt,
                      double score_floor = 0.01);

}  // namespace splam

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "splam/sbf.hpp"

namespace splam {

enum class EstimatorTag { Sam, Pl, Asam };

std::string to_string(EstimatorTag tag);

//! Observations (Y, X, Z) with Z min-max rescaled to [0,1]^d.
//! X columns are left on their native scale so coefficients stay
//! interpretable; rescale_records holds the (min, max) used per Z column.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;
  Eigen::MatrixXd z;
  std::string y_name = "y";
  std::vector<std::string> x_names;
  std::vector<std::string> z_names;
  std::vector<std::pair<double, double>> rescale_records;

  Eigen::Index n() const { return y.size(); }
  int p() const { return int(x.cols()); }
  int d() const { return int(z.cols()); }
  void validate() const;
};

struct PlamFit {
  EstimatorTag tag = EstimatorTag::Sam;
  Eigen::VectorXd beta;
  double intercept = 0.0;
  //! Nonparametric part at beta: centered component curves, m0 = 0
  //! (the intercept field carries the constant).
  AdditiveFit additive;
  Eigen::VectorXd residuals;
  double sigma2 = 0.0;
  Eigen::MatrixXd cov_beta;
  //! Centered residualized design and response (X - m_X(Z), Y - m_Y(Z),
  //! both demeaned); cached for the adaptive one-step update.
  Eigen::MatrixXd x_tilde;
  Eigen::VectorXd y_tilde;
  Bandwidths bandwidths;
};

//! Gaussian-profile estimator: residualize Y and every X column by their
//! additive backfitting fits on Z, then least squares of Y-tilde on X-tilde.
PlamFit sam_fit(const Dataset& data, const SbfConfig& config);

//! Partially linear comparator without the additive structure: residualizes
//! by the full d-dimensional product-kernel smoother instead.
PlamFit pl_fit(const Dataset& data, const Bandwidths& bandwidths,
               const BaseKernel& kernel = BaseKernel::epanechnikov(), int grid_size = 101);

//! Square roots of the diagonal of cov_beta.
Eigen::VectorXd standard_errors(const PlamFit& fit);

//! 1 - RSS / TSS with fitted values X beta + intercept + additive part.
double generalized_r2(const PlamFit& fit, const Dataset& data);

//! Default per-coordinate rule-of-thumb bandwidths for a dataset.
Bandwidths default_bandwidths(const Dataset& data);

}  // namespace splam

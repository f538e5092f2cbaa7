#include "splam/plam.hpp"

#include <cmath>
#include <sstream>

#include "splam/common.hpp"

namespace splam {

std::string to_string(EstimatorTag tag) {
  switch (tag) {
    case EstimatorTag::Sam: return "sam";
    case EstimatorTag::Pl: return "pl";
    case EstimatorTag::Asam: return "asam";
  }
  return "?";
}

void Dataset::validate() const {
  const Eigen::Index nn = y.size();
  if (x.rows() != nn || z.rows() != nn) throw ConfigError("dataset: row count mismatch");
  if (nn <= Eigen::Index(p() + d() + 5))
    throw ConfigError("dataset: need n > p + d + 5 observations");
  if (!y.allFinite() || !x.allFinite() || !z.allFinite())
    throw ConfigError("dataset: missing or non-finite values");
  if ((z.array() < 0.0).any() || (z.array() > 1.0).any())
    throw ConfigError("dataset: Z entries must lie in [0,1]; rescale at ingestion");
}

namespace {

struct LeastSquares {
  Eigen::VectorXd beta;
  Eigen::MatrixXd gram;       // centered X-tilde' X-tilde
  Eigen::VectorXd residuals;  // centered, mean exactly zero
  double mean_shift = 0.0;    // mean(y_tilde) - mean(x_tilde)' beta
};

//! Least squares of y_tilde on x_tilde with an intercept (both centered
//! internally). Raises ConcurvityError when the centered Gram matrix is
//! rank deficient relative to the scale of the original X columns.
LeastSquares profile_least_squares(const Eigen::MatrixXd& x_tilde,
                                   const Eigen::VectorXd& y_tilde,
                                   const Eigen::MatrixXd& x_original) {
  const Eigen::Index n = y_tilde.size();
  const int p = int(x_tilde.cols());
  Eigen::RowVectorXd mu_x = x_tilde.colwise().mean();
  const double mu_y = y_tilde.mean();
  Eigen::MatrixXd xc = x_tilde.rowwise() - mu_x;
  Eigen::VectorXd yc = y_tilde.array() - mu_y;

  Eigen::MatrixXd gram = xc.transpose() * xc;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const double lambda_min = es.eigenvalues().minCoeff();
  const double lambda_max = es.eigenvalues().maxCoeff();
  // Scale reference: the unresidualized centered Gram. Concurvity means the
  // residualized variance is tiny relative to the original variance.
  Eigen::MatrixXd xo = x_original.rowwise() - x_original.colwise().mean();
  const double scale = xo.squaredNorm();
  if (!(lambda_min > 0.0) || lambda_max / lambda_min > 1e10 ||
      lambda_min <= 1e-10 * std::max(scale, 1e-300)) {
    std::ostringstream msg;
    msg << "concurvity: residualized Gram matrix is numerically singular "
        << "(smallest eigenvalue " << lambda_min << ", largest " << lambda_max
        << "); X is explained additively by Z";
    throw ConcurvityError(msg.str(), lambda_min);
  }

  LeastSquares ls;
  ls.gram = std::move(gram);
  ls.beta = ls.gram.ldlt().solve(xc.transpose() * yc);
  ls.residuals = yc - xc * ls.beta;
  ls.residuals.array() -= ls.residuals.mean();  // exact zero mean
  ls.mean_shift = mu_y - mu_x.dot(ls.beta);
  (void)n;
  (void)p;
  return ls;
}

}  // namespace

Bandwidths default_bandwidths(const Dataset& data) {
  Eigen::VectorXd h(data.d());
  for (int j = 0; j < data.d(); ++j) h(j) = rot_bandwidth(data.z.col(j));
  return Bandwidths{h};
}

PlamFit sam_fit(const Dataset& data, const SbfConfig& config) {
  data.validate();
  const Eigen::Index n = data.n();
  const int p = data.p();
  const int d = data.d();

  const ProjectionOperator proj = ProjectionOperator::build(data.z, config);

  Eigen::MatrixXd responses(n, p + 1);
  responses.col(0) = data.y;
  responses.rightCols(p) = data.x;
  const std::vector<AdditiveFit> fits = sbf_multi(responses, proj, config);

  // Residualize through the fitted additive parts (including their means).
  Eigen::VectorXd y_tilde(n);
  Eigen::MatrixXd x_tilde(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::RowVectorXd zi = data.z.row(i);
    y_tilde(i) = data.y(i) - fits[0].evaluate(zi);
    for (int k = 0; k < p; ++k)
      x_tilde(i, k) = data.x(i, k) - fits[std::size_t(k) + 1].evaluate(zi);
  }

  LeastSquares ls = profile_least_squares(x_tilde, y_tilde, data.x);

  PlamFit fit;
  fit.tag = EstimatorTag::Sam;
  fit.beta = ls.beta;
  fit.bandwidths = config.bandwidths;

  // Combined nonparametric part at beta-hat: m_Y,j - sum_k beta_k m_Xk,j.
  fit.additive.grid = proj.grid();
  fit.additive.m0 = 0.0;
  fit.additive.components.reserve(std::size_t(d));
  for (int j = 0; j < d; ++j) {
    Eigen::VectorXd comp = fits[0].components[std::size_t(j)];
    for (int k = 0; k < p; ++k)
      comp -= ls.beta(k) * fits[std::size_t(k) + 1].components[std::size_t(j)];
    fit.additive.components.push_back(std::move(comp));
  }
  int iters = 0;
  double delta = 0.0;
  for (const auto& f : fits) {
    iters = std::max(iters, f.iterations);
    delta = std::max(delta, f.final_delta);
  }
  fit.additive.iterations = iters;
  fit.additive.final_delta = delta;
  fit.additive.converged = true;

  double constant = fits[0].m0;
  for (int k = 0; k < p; ++k) constant -= ls.beta(k) * fits[std::size_t(k) + 1].m0;
  fit.intercept = constant + ls.mean_shift;

  fit.residuals = ls.residuals;
  fit.sigma2 = ls.residuals.squaredNorm() / double(n - p);
  fit.cov_beta = fit.sigma2 * ls.gram.inverse();
  // Cache centered residualized columns for the one-step update.
  fit.x_tilde = x_tilde.rowwise() - x_tilde.colwise().mean();
  fit.y_tilde = y_tilde.array() - y_tilde.mean();
  return fit;
}

PlamFit pl_fit(const Dataset& data, const Bandwidths& bandwidths, const BaseKernel& kernel,
               int grid_size) {
  data.validate();
  bandwidths.validate();
  if (bandwidths.dim() != data.d()) throw ConfigError("pl_fit: bandwidth dimension mismatch");
  const Eigen::Index n = data.n();
  const int p = data.p();
  const int d = data.d();

  // Residualization windows need at least two observations: a self-only
  // window reproduces the response exactly and carries no information.
  Eigen::VectorXd y_tilde =
      data.y - nw_full(data.y, data.z, bandwidths, data.z, kernel, 2);
  Eigen::MatrixXd x_tilde(n, p);
  for (int k = 0; k < p; ++k) {
    x_tilde.col(k) =
        data.x.col(k) - nw_full(data.x.col(k), data.z, bandwidths, data.z, kernel, 2);
  }

  LeastSquares ls = profile_least_squares(x_tilde, y_tilde, data.x);

  PlamFit fit;
  fit.tag = EstimatorTag::Pl;
  fit.beta = ls.beta;
  fit.bandwidths = bandwidths;
  fit.intercept = ls.mean_shift;
  fit.residuals = ls.residuals;
  fit.sigma2 = ls.residuals.squaredNorm() / double(n - p);
  fit.cov_beta = fit.sigma2 * ls.gram.inverse();
  fit.x_tilde = x_tilde.rowwise() - x_tilde.colwise().mean();
  fit.y_tilde = y_tilde.array() - y_tilde.mean();

  // Reporting slot: full-dimensional smooth of Y - X beta along the grid
  // diagonal, stored as component 0. Off-support diagonal points are NaN.
  fit.additive.grid = Grid(grid_size);
  fit.additive.m0 = 0.0;
  Eigen::VectorXd partial = data.y - data.x * ls.beta;
  const double partial_mean = partial.mean();
  Eigen::MatrixXd diag_points(grid_size, d);
  for (int a = 0; a < grid_size; ++a)
    diag_points.row(a).setConstant(fit.additive.grid.points()(a));
  Eigen::VectorXd diag_curve(grid_size);
  try {
    diag_curve = nw_full(partial, data.z, bandwidths, diag_points, kernel, 1);
    diag_curve.array() -= partial_mean;
  } catch (const DegenerateWindowError&) {
    diag_curve.setConstant(std::numeric_limits<double>::quiet_NaN());
  }
  fit.additive.components.assign(std::size_t(d), Eigen::VectorXd::Zero(grid_size));
  fit.additive.components[0] = diag_curve;
  fit.additive.converged = true;
  return fit;
}

Eigen::VectorXd standard_errors(const PlamFit& fit) {
  return fit.cov_beta.diagonal().cwiseMax(0.0).cwiseSqrt();
}

double generalized_r2(const PlamFit& fit, const Dataset& data) {
  const Eigen::Index n = data.n();
  const double y_mean = data.y.mean();
  const double tss = (data.y.array() - y_mean).square().sum();
  if (!(tss > 0.0)) throw ConfigError("generalized_r2: constant response");
  if (fit.tag == EstimatorTag::Pl) {
    // The PL additive slot is a diagonal tabulation for reporting, not an
    // additive representation; the residuals already hold Y minus the fit.
    return 1.0 - fit.residuals.squaredNorm() / tss;
  }
  double rss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double yhat = data.x.row(i).dot(fit.beta) + fit.intercept +
                        evaluate_additive(fit.additive, data.z.row(i));
    const double e = data.y(i) - yhat;
    rss += e * e;
  }
  return 1.0 - rss / tss;
}

}  // namespace splam

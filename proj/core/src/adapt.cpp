#include "splam/adapt.hpp"

#include <cmath>
#include <sstream>

#include "splam/common.hpp"

namespace splam {

ScoreEstimate::ScoreEstimate(Eigen::VectorXd pseudo_errors, double a, double b,
                             BaseKernel kernel)
  : errors_(std::move(pseudo_errors)), a_(a), b_(b), kernel_(kernel) {
  if (errors_.size() == 0) throw ConfigError("ScoreEstimate: no pseudo-errors");
  if (!(a_ > 0.0)) throw InvalidBandwidthError("score bandwidth a must be positive");
  if (!(b_ > 0.0)) throw ConfigError("score floor b must be positive");
}

double ScoreEstimate::g(double t) const {
  const Eigen::Index n = errors_.size();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) acc += kernel_((t - errors_(i)) / a_);
  return b_ + acc / (double(n) * a_);
}

double ScoreEstimate::g_prime(double t) const {
  const Eigen::Index n = errors_.size();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) acc += kernel_.deriv((t - errors_(i)) / a_);
  return acc / (double(n) * a_ * a_);
}

double ScoreEstimate::phi(double e) const {
  const double pos = g_prime(e) / g(e);
  const double neg = g_prime(-e) / g(-e);
  return 0.5 * (pos - neg);
}

Eigen::VectorXd pseudo_errors(const PlamFit& fit, const Dataset& data) {
  if (fit.tag != EstimatorTag::Sam)
    throw ConfigError("pseudo_errors: expects the Gaussian-profile (sam) fit");
  if (fit.y_tilde.size() != data.n())
    throw ConfigError("pseudo_errors: fit does not match dataset");
  Eigen::VectorXd eps = fit.y_tilde - fit.x_tilde * fit.beta;
  eps.array() -= eps.mean();
  return eps;
}

Eigen::MatrixXd info_hat(const ScoreEstimate& score,
                         const Eigen::Ref<const Eigen::MatrixXd>& x_tilde) {
  const Eigen::Index n = x_tilde.rows();
  if (score.pseudo_errors().size() != n) throw ConfigError("info_hat: length mismatch");
  double mean_phi2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = score.phi(score.pseudo_errors()(i));
    mean_phi2 += s * s;
  }
  mean_phi2 /= double(n);
  if (!(mean_phi2 > 0.0))
    throw NonInvertibleInformationError(
        "info_hat: every estimated score is zero; increase b or use a smaller a");
  return (x_tilde.transpose() * x_tilde / double(n)) * mean_phi2;
}

std::vector<std::string> validate_tuning(double a, double b, const Bandwidths& h,
                                         Eigen::Index n) {
  std::vector<std::string> warnings;
  const double sqrt_n = std::sqrt(double(n));
  const double log_n = std::log(double(n));
  const double a2_b2 = std::min(a * a, b * b);
  for (int j = 0; j < h.dim(); ++j) {
    const double grow = sqrt_n * h.h(j) * b * a2_b2;
    if (grow < 1.0) {
      std::ostringstream msg;
      msg << "tuning: n^(1/2) h_" << j + 1 << " b (a^2 ^ b^2) = " << grow
          << " < 1; the one-step correction may be unstable at this sample size";
      warnings.push_back(msg.str());
    }
    const double smooth = h.h(j) > 0.0 ? a * a / (h.h(j) * log_n * log_n) : 0.0;
    if (smooth < 0.1) {
      std::ostringstream msg;
      msg << "tuning: a^2 / (h_" << j + 1 << " log^2 n) = " << smooth
          << " < 0.1; the score bandwidth a is small relative to h_" << j + 1;
      warnings.push_back(msg.str());
    }
  }
  return warnings;
}

EfficientFit asam_fit(const Dataset& data, const SbfConfig& config,
                      std::optional<double> score_bandwidth, double score_floor) {
  if (!(score_floor > 0.0)) throw ConfigError("asam_fit: score floor b must be positive");

  EfficientFit out;
  out.base = sam_fit(data, config);
  const Eigen::Index n = data.n();

  Eigen::VectorXd eps = pseudo_errors(out.base, data);

  out.a_was_auto = !score_bandwidth.has_value();
  if (score_bandwidth) {
    out.a = *score_bandwidth;
  } else {
    const SjBandwidth sj = sj_bandwidth(eps);
    out.a = sj.value;
    if (sj.fallback)
      out.warnings.push_back(
          "score bandwidth: Sheather-Jones equation had no root in the bracket; "
          "using the Silverman fallback");
  }
  out.b = score_floor;

  const double skew = skewness(eps);
  if (std::abs(skew) > 0.5) {
    std::ostringstream msg;
    msg << "pseudo-error skewness " << skew
        << " exceeds 0.5; the symmetric-error assumption looks doubtful and the "
           "one-step update may be misleading";
    out.warnings.push_back(msg.str());
  }
  for (auto& w : validate_tuning(out.a, out.b, config.bandwidths, n))
    out.warnings.push_back(std::move(w));

  const ScoreEstimate score(eps, out.a, out.b);
  out.info = info_hat(score, out.base.x_tilde);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.info);
  const double lambda_min = es.eigenvalues().minCoeff();
  const double lambda_max = es.eigenvalues().maxCoeff();
  if (!(lambda_min > 0.0) || lambda_max / lambda_min > 1e12)
    throw NonInvertibleInformationError(
        "asam_fit: estimated information matrix is not invertible; "
        "try a larger floor b or score bandwidth a");

  Eigen::VectorXd correction = Eigen::VectorXd::Zero(data.p());
  for (Eigen::Index i = 0; i < n; ++i)
    correction += out.base.x_tilde.row(i).transpose() * score.phi(eps(i));
  correction /= double(n);

  out.beta_tilde = out.base.beta - out.info.ldlt().solve(correction);
  out.cov_beta = out.info.inverse() / double(n);
  return out;
}

}  // namespace splam

#include "splam/sbf.hpp"

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <sstream>

namespace splam {

void SbfConfig::validate(int d) const {
  if (local_linear)
    throw NotImplementedError("local-linear smooth backfitting is not implemented; "
                              "only the local constant variant is available");
  if (grid_size < 2) throw ConfigError("grid_size must be at least 2");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  bandwidths.validate();
  if (bandwidths.dim() != d) {
    std::ostringstream msg;
    msg << "got " << bandwidths.dim() << " bandwidths for " << d << " coordinates";
    throw ConfigError(msg.str());
  }
}

ProjectionOperator ProjectionOperator::build(const Eigen::Ref<const Eigen::MatrixXd>& z,
                                             const SbfConfig& config) {
  const Eigen::Index n = z.rows();
  const int d = int(z.cols());
  if (d < 1) throw ConfigError("build_projection: no nonparametric coordinates");
  if (n < 10) throw ConfigError("build_projection: need at least 10 observations");
  config.validate(d);
  if ((z.array() < 0.0).any() || (z.array() > 1.0).any())
    throw ConfigError("build_projection: Z entries must lie in [0,1]");

  ProjectionOperator proj;
  proj.d_ = d;
  proj.n_ = n;
  proj.grid_ = Grid(config.grid_size);
  proj.bandwidths_ = config.bandwidths;
  const int g = proj.grid_.size();
  const Eigen::VectorXd& pts = proj.grid_.points();
  const Eigen::VectorXd& w = proj.grid_.weights();

  proj.kernel_rows_.reserve(std::size_t(d));
  for (int j = 0; j < d; ++j) {
    const double h = config.bandwidths.h(j);
    Eigen::MatrixXd rows(n, g);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = boundary_factor(config.kernel, z(i, j), h) / h;
      for (int a = 0; a < g; ++a) {
        rows(i, a) = c * config.kernel((pts(a) - z(i, j)) / h);
      }
      // Unit trapezoid mass per observation keeps the discrete system
      // consistent: marginals integrate to one and q_jk marginalizes to q_j.
      const double mass = rows.row(i).dot(w);
      if (!(mass > 0.0)) {
        std::ostringstream msg;
        msg << "build_projection: observation " << i << " in coordinate " << j
            << " has no kernel mass on the grid";
        throw SparseRegionError(msg.str(), j, -1);
      }
      rows.row(i) /= mass;
    }
    proj.kernel_rows_.push_back(std::move(rows));
  }

  proj.q_marg_.reserve(std::size_t(d));
  for (int j = 0; j < d; ++j) {
    Eigen::VectorXd q = proj.kernel_rows_[std::size_t(j)].colwise().mean();
    const double guard = denominator_guard(n, config.bandwidths.h(j));
    for (int a = 0; a < g; ++a) {
      if (q(a) <= guard) {
        std::ostringstream msg;
        msg << "build_projection: estimated density of coordinate " << j
            << " vanishes at grid point " << a << " (z = " << pts(a)
            << "); the design leaves this region empty at bandwidth "
            << config.bandwidths.h(j);
        throw SparseRegionError(msg.str(), j, a);
      }
    }
    proj.q_marg_.push_back(std::move(q));
  }

  proj.q_biv_.assign(std::size_t(d) * std::size_t(d), Eigen::MatrixXd());
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      Eigen::MatrixXd q = proj.kernel_rows_[std::size_t(j)].transpose() *
                          proj.kernel_rows_[std::size_t(k)] / double(n);
      proj.q_biv_[std::size_t(j) * std::size_t(d) + std::size_t(k)] = q;
      proj.q_biv_[std::size_t(k) * std::size_t(d) + std::size_t(j)] = q.transpose();
    }
  }
  return proj;
}

const Eigen::MatrixXd& ProjectionOperator::pairwise_density(int j, int k) const {
  if (j == k || j < 0 || k < 0 || j >= d_ || k >= d_)
    throw ConfigError("pairwise_density: invalid coordinate pair");
  return q_biv_[std::size_t(j) * std::size_t(d_) + std::size_t(k)];
}

Eigen::VectorXd ProjectionOperator::marginal_regression(
    int j, const Eigen::Ref<const Eigen::VectorXd>& responses) const {
  if (responses.size() != n_) throw ConfigError("marginal_regression: length mismatch");
  Eigen::VectorXd num =
      kernel_rows_[std::size_t(j)].transpose() * responses / double(n_);
  return num.cwiseQuotient(q_marg_[std::size_t(j)]);
}

double AdditiveFit::evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& z) const {
  return evaluate_additive(*this, z);
}

double evaluate_additive(const AdditiveFit& fit, const Eigen::Ref<const Eigen::RowVectorXd>& z) {
  if (std::size_t(z.size()) != fit.components.size())
    throw ConfigError("evaluate_additive: dimension mismatch");
  double out = fit.m0;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    out += fit.grid.interpolate(fit.components[std::size_t(j)], z(j));
  }
  return out;
}

namespace {

bool sbf_logging_enabled() {
  static const bool enabled = [] {
    const char* v = std::getenv("SBF_PLAM_LOG");
    return v != nullptr && std::string(v) == "debug";
  }();
  return enabled;
}

}  // namespace

AdditiveFit sbf_fit(const Eigen::Ref<const Eigen::VectorXd>& responses,
                    const ProjectionOperator& proj, const SbfConfig& config) {
  if (responses.size() != proj.sample_size())
    throw ConfigError("sbf_fit: response length does not match projection sample size");
  if (config.local_linear)
    throw NotImplementedError("local-linear smooth backfitting is not implemented");
  const int d = proj.dim();
  const int g = proj.grid().size();
  const Eigen::VectorXd& w = proj.grid().weights();

  AdditiveFit fit;
  fit.grid = proj.grid();
  fit.m0 = responses.mean();
  fit.components.assign(std::size_t(d), Eigen::VectorXd::Zero(g));

  std::vector<Eigen::VectorXd> mtilde;
  mtilde.reserve(std::size_t(d));
  for (int j = 0; j < d; ++j) mtilde.push_back(proj.marginal_regression(j, responses));

  Eigen::VectorXd proj_sum(g), update(g);
  for (int sweep = 1; sweep <= config.max_iterations; ++sweep) {
    double delta = 0.0;
    for (int j = 0; j < d; ++j) {
      // Pi_j(m_k)(z_j) = int m_k(z_k) q_jk(z_j, z_k) dz_k / q_j(z_j)
      proj_sum.setZero();
      for (int k = 0; k < d; ++k) {
        if (k == j) continue;
        proj_sum.noalias() += proj.pairwise_density(j, k) *
                              (w.cwiseProduct(fit.components[std::size_t(k)]));
      }
      update = mtilde[std::size_t(j)].array() - fit.m0 -
               proj_sum.cwiseQuotient(proj.marginal_density(j)).array();
      update.array() -= proj.inner_with_one(j, update);
      delta = std::max(delta, (update - fit.components[std::size_t(j)]).cwiseAbs().maxCoeff());
      fit.components[std::size_t(j)] = update;
    }
    fit.sweep_deltas.push_back(delta);
    fit.iterations = sweep;
    fit.final_delta = delta;
    if (sbf_logging_enabled())
      std::cerr << "[sbf] sweep " << sweep << " delta " << delta << "\n";
    if (delta <= config.tolerance) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged) {
    std::ostringstream msg;
    msg << "sbf_fit: no convergence after " << config.max_iterations
        << " sweeps, last sup-norm change " << fit.final_delta << " > tolerance "
        << config.tolerance;
    throw NonConvergenceError(msg.str(), fit.final_delta);
  }
  return fit;
}

AdditiveFit sbf_direct_oracle(const Eigen::Ref<const Eigen::VectorXd>& responses,
                              const ProjectionOperator& proj) {
  const int d = proj.dim();
  const int g = proj.grid().size();
  if (long(d) * long(g) > 2000)
    throw ConfigError("sbf_direct_oracle: d * G exceeds the dense-solve limit of 2000");
  if (responses.size() != proj.sample_size())
    throw ConfigError("sbf_direct_oracle: response length mismatch");
  const Eigen::VectorXd& w = proj.grid().weights();
  const double m0 = responses.mean();

  // Unknowns: d blocks of G component values, then d centering multipliers.
  const int nunk = d * g + d;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nunk, nunk);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nunk);

  for (int j = 0; j < d; ++j) {
    const Eigen::VectorXd mt = proj.marginal_regression(j, responses);
    const Eigen::VectorXd& qj = proj.marginal_density(j);
    for (int p = 0; p < g; ++p) {
      const int row = j * g + p;
      a(row, row) += 1.0;
      for (int k = 0; k < d; ++k) {
        if (k == j) continue;
        const Eigen::MatrixXd& qjk = proj.pairwise_density(j, k);
        for (int q = 0; q < g; ++q) {
          a(row, k * g + q) += w(q) * qjk(p, q) / qj(p);
        }
      }
      a(row, d * g + j) = 1.0;
      rhs(row) = mt(p) - m0;
    }
    // centering constraint: <m_j, 1> = 0
    const int crow = d * g + j;
    for (int p = 0; p < g; ++p) a(crow, j * g + p) = w(p) * qj(p);
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible())
    throw SingularSystemError(
        "sbf_direct_oracle: discretized backfitting system is singular "
        "(concurvity at the discretization level)");
  const Eigen::VectorXd sol = lu.solve(rhs);
  const double rel_residual =
      (a * sol - rhs).norm() / std::max(1.0, rhs.norm());
  if (!std::isfinite(rel_residual) || rel_residual > 1e-8)
    throw SingularSystemError("sbf_direct_oracle: dense solve failed to reach a "
                              "consistent solution (near-singular system)");

  AdditiveFit fit;
  fit.grid = proj.grid();
  fit.m0 = m0;
  fit.converged = true;
  fit.iterations = 1;
  fit.final_delta = 0.0;
  fit.components.reserve(std::size_t(d));
  for (int j = 0; j < d; ++j) fit.components.push_back(sol.segment(j * g, g));
  return fit;
}

std::vector<AdditiveFit> sbf_multi(const Eigen::Ref<const Eigen::MatrixXd>& response_matrix,
                                   const ProjectionOperator& proj, const SbfConfig& config) {
  if (response_matrix.cols() < 1) throw ConfigError("sbf_multi: no response columns");
  std::vector<AdditiveFit> fits;
  fits.reserve(std::size_t(response_matrix.cols()));
  for (Eigen::Index c = 0; c < response_matrix.cols(); ++c) {
    try {
      fits.push_back(sbf_fit(response_matrix.col(c), proj, config));
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "sbf_multi: column " << c << ": " << e.what();
      throw Error(msg.str());
    }
  }
  return fits;
}

}  // namespace splam

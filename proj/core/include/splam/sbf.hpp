#pragma once

#include <Eigen/Dense>
#include <vector>

#include "splam/kernels.hpp"

namespace splam {

struct SbfConfig {
  Bandwidths bandwidths;
  int grid_size = 101;
  double tolerance = 1e-8;
  int max_iterations = 500;
  BaseKernel kernel = BaseKernel::epanechnikov();
  //! Only the local constant update is implemented; requesting the local
  //! linear variant is rejected with NotImplementedError.
  bool local_linear = false;

  void validate(int d) const;
};

//! Precomputed projection data for smooth backfitting on a fixed design:
//! per-observation kernel weight rows over the grid, the marginal densities
//! q_j and every pairwise density q_jk built from them.
//!
//! Each observation's row is normalized to unit trapezoid mass, so the
//! marginal densities integrate to one and integrating q_jk over z_k
//! reproduces q_j exactly (to rounding), not just up to O(G^-2).
//!
//! Immutable after construction; safe to share across threads.
class ProjectionOperator {
public:
  static ProjectionOperator build(const Eigen::Ref<const Eigen::MatrixXd>& z,
                                  const SbfConfig& config);

  int dim() const { return d_; }
  Eigen::Index sample_size() const { return n_; }
  const Grid& grid() const { return grid_; }
  const Bandwidths& bandwidths() const { return bandwidths_; }

  const Eigen::VectorXd& marginal_density(int j) const { return q_marg_[std::size_t(j)]; }
  //! q_jk on the grid, rows indexed by z_j, columns by z_k (j != k).
  const Eigen::MatrixXd& pairwise_density(int j, int k) const;

  //! Local constant marginal regression of responses on coordinate j.
  Eigen::VectorXd marginal_regression(int j,
                                      const Eigen::Ref<const Eigen::VectorXd>& responses) const;

  //! <f, 1>_j = integral of f against q_j (trapezoid).
  double inner_with_one(int j, const Eigen::Ref<const Eigen::VectorXd>& f) const {
    return (grid_.weights().array() * q_marg_[std::size_t(j)].array() * f.array()).sum();
  }

private:
  ProjectionOperator() : grid_(2) {}

  int d_ = 0;
  Eigen::Index n_ = 0;
  Grid grid_;
  Bandwidths bandwidths_;
  //! kernel_rows_[j] is n x G; row i holds K_hj(grid, Z_j^i) normalized to
  //! unit trapezoid mass in the grid argument.
  std::vector<Eigen::MatrixXd> kernel_rows_;
  std::vector<Eigen::VectorXd> q_marg_;
  //! Flattened d x d array, entry (j, k) for j != k; (j, j) unused.
  std::vector<Eigen::MatrixXd> q_biv_;
};

//! Centered additive fit: m0 plus one curve per coordinate on the grid.
struct AdditiveFit {
  double m0 = 0.0;
  std::vector<Eigen::VectorXd> components;
  int iterations = 0;
  double final_delta = 0.0;
  bool converged = false;
  std::vector<double> sweep_deltas;
  Grid grid{2};

  double evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& z) const;
};

//! m0 + sum_j of component j linearly interpolated at z_j; clamps at 0 and 1.
double evaluate_additive(const AdditiveFit& fit, const Eigen::Ref<const Eigen::RowVectorXd>& z);

//! Gauss-Seidel smooth backfitting: cycles the componentwise update
//!   m_j <- mtilde_j - sum_{k != j} Pi_j(m_k) - m0,
//! re-centering against q_j after every component update, until the
//! sup-norm change over a full sweep is at most config.tolerance.
AdditiveFit sbf_fit(const Eigen::Ref<const Eigen::VectorXd>& responses,
                    const ProjectionOperator& proj, const SbfConfig& config);

//! Assembles the discretized integral equations over all d*G grid values
//! plus d centering multipliers and solves them as one dense linear system.
//! Test oracle: O((dG)^3), requires d * G <= 2000.
AdditiveFit sbf_direct_oracle(const Eigen::Ref<const Eigen::VectorXd>& responses,
                              const ProjectionOperator& proj);

//! One fit per response column, sharing the projection data.
std::vector<AdditiveFit> sbf_multi(const Eigen::Ref<const Eigen::MatrixXd>& response_matrix,
                                   const ProjectionOperator& proj, const SbfConfig& config);

}  // namespace splam

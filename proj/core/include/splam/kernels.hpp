#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "splam/errors.hpp"

namespace splam {

enum class KernelKind { Epanechnikov, Gaussian };

//! Symmetric base kernel K0: nonnegative, integrates to one.
//! Epanechnikov is the regression/density kernel, the Gaussian density is
//! used for score estimation (it has the smoothness the score step needs).
struct BaseKernel {
  KernelKind kind = KernelKind::Epanechnikov;

  static BaseKernel epanechnikov() { return BaseKernel{KernelKind::Epanechnikov}; }
  static BaseKernel gaussian() { return BaseKernel{KernelKind::Gaussian}; }

  //! Support radius; +inf for the Gaussian.
  double support() const {
    return kind == KernelKind::Epanechnikov ? 1.0 : std::numeric_limits<double>::infinity();
  }
  double operator()(double u) const;
  //! dK0/du.
  double deriv(double u) const;
  //! Integral of K0 over (-inf, t].
  double cdf(double t) const;
};

//! Equally spaced evaluation grid on [0,1] with trapezoid quadrature weights.
class Grid {
public:
  explicit Grid(int size = 101);

  int size() const { return int(points_.size()); }
  double spacing() const { return spacing_; }
  const Eigen::VectorXd& points() const { return points_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  double integrate(const Eigen::Ref<const Eigen::VectorXd>& values) const {
    return weights_.dot(values);
  }
  //! Linear interpolation of grid values at z; clamps outside [0,1].
  double interpolate(const Eigen::Ref<const Eigen::VectorXd>& values, double z) const;

private:
  Eigen::VectorXd points_;
  Eigen::VectorXd weights_;
  double spacing_ = 0.0;
};

//! One bandwidth per nonparametric coordinate, on the [0,1] scale.
struct Bandwidths {
  Eigen::VectorXd h;

  Bandwidths() = default;
  explicit Bandwidths(Eigen::VectorXd values) : h(std::move(values)) {}
  static Bandwidths constant(int d, double value) {
    return Bandwidths{Eigen::VectorXd::Constant(d, value)};
  }
  int dim() const { return int(h.size()); }
  void validate() const;
};

//! Mass a kernel window below this is treated as numerically empty.
inline double denominator_guard(Eigen::Index n, double h) {
  return 1e-10 / (double(n) * h);
}

//! Boundary correction factor c(v): 1 / (kernel mass of [0,1] around v).
//! Closed form for the Epanechnikov kernel, erf-based for the Gaussian.
double boundary_factor(const BaseKernel& kernel, double v, double h);

//! Boundary corrected kernel K_h(u, v) = c(v) h^-1 K0((u - v) / h), with
//! c(v) making the integral over u in [0,1] equal to one for every v.
double boundary_kernel(const BaseKernel& kernel, double u, double v, double h);

//! Marginal design density estimate on the grid. The evaluation point sits
//! in the normalized argument, so the estimate integrates to one exactly.
Eigen::VectorXd kde_1d(const Eigen::Ref<const Eigen::VectorXd>& samples, double h,
                       const Grid& grid, const BaseKernel& kernel = BaseKernel::epanechnikov());

//! Bivariate analogue with a product of boundary corrected kernels;
//! entry (a, b) is the estimate at (grid_j[a], grid_k[b]).
Eigen::MatrixXd kde_2d(const Eigen::Ref<const Eigen::VectorXd>& samples_j,
                       const Eigen::Ref<const Eigen::VectorXd>& samples_k, double h_j,
                       double h_k, const Grid& grid,
                       const BaseKernel& kernel = BaseKernel::epanechnikov());

//! Local constant regression of responses on one coordinate, on the grid.
Eigen::VectorXd nw_marginal(const Eigen::Ref<const Eigen::VectorXd>& responses,
                            const Eigen::Ref<const Eigen::VectorXd>& z_col, double h,
                            const Grid& grid,
                            const BaseKernel& kernel = BaseKernel::epanechnikov());

//! Full d-dimensional product-kernel regression at arbitrary points.
//! A window whose weight mass is below the guard, or which sees fewer than
//! min_window_count observations, makes that row degenerate.
Eigen::VectorXd nw_full(const Eigen::Ref<const Eigen::VectorXd>& responses,
                        const Eigen::Ref<const Eigen::MatrixXd>& z, const Bandwidths& bw,
                        const Eigen::Ref<const Eigen::MatrixXd>& eval_points,
                        const BaseKernel& kernel = BaseKernel::epanechnikov(),
                        int min_window_count = 1);

//! Rule-of-thumb bandwidth 1.06 sd n^{-1/5} on the [0,1] scale, floored at
//! the minimal radius that keeps a compact kernel's window nonempty across
//! the largest gap in the column, then clamped to [0.01, 0.5].
double rot_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& z_col);

struct SjBandwidth {
  double value = 0.0;
  //! True when no root was bracketed and the Silverman fallback was used.
  bool fallback = false;
};

//! Sheather-Jones solve-the-equation bandwidth (Gaussian kernel), with
//! binned pair counts and bisection on [0.01, 10] x sd n^{-1/5}.
SjBandwidth sj_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& samples);

}  // namespace splam

#include "splam/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "splam/common.hpp"

namespace splam {

double BaseKernel::operator()(double u) const {
  switch (kind) {
    case KernelKind::Epanechnikov:
      return std::abs(u) >= 1.0 ? 0.0 : 0.75 * (1.0 - u * u);
    case KernelKind::Gaussian:
      return norm_pdf(u);
  }
  return 0.0;
}

double BaseKernel::deriv(double u) const {
  switch (kind) {
    case KernelKind::Epanechnikov:
      return std::abs(u) >= 1.0 ? 0.0 : -1.5 * u;
    case KernelKind::Gaussian:
      return -u * norm_pdf(u);
  }
  return 0.0;
}

double BaseKernel::cdf(double t) const {
  switch (kind) {
    case KernelKind::Epanechnikov: {
      if (t <= -1.0) return 0.0;
      if (t >= 1.0) return 1.0;
      return 0.5 + 0.75 * t - 0.25 * t * t * t;
    }
    case KernelKind::Gaussian:
      return norm_cdf(t);
  }
  return 0.0;
}

Grid::Grid(int size) {
  if (size < 2) throw ConfigError("grid size must be at least 2");
  points_ = Eigen::VectorXd::LinSpaced(size, 0.0, 1.0);
  spacing_ = 1.0 / double(size - 1);
  weights_ = Eigen::VectorXd::Constant(size, spacing_);
  weights_(0) *= 0.5;
  weights_(size - 1) *= 0.5;
}

double Grid::interpolate(const Eigen::Ref<const Eigen::VectorXd>& values, double z) const {
  if (values.size() != points_.size())
    throw ConfigError("interpolate: value vector does not match grid length");
  if (z <= 0.0) return values(0);
  if (z >= 1.0) return values(values.size() - 1);
  const double pos = z / spacing_;
  auto lo = static_cast<Eigen::Index>(pos);
  if (lo >= values.size() - 1) lo = values.size() - 2;
  const double frac = pos - double(lo);
  return (1.0 - frac) * values(lo) + frac * values(lo + 1);
}

void Bandwidths::validate() const {
  if (h.size() == 0) throw InvalidBandwidthError("bandwidth vector is empty");
  for (Eigen::Index j = 0; j < h.size(); ++j) {
    if (!(h(j) > 0.0) || !(h(j) < 1.0)) {
      std::ostringstream msg;
      msg << "bandwidth " << j << " = " << h(j) << " outside (0, 1)";
      throw InvalidBandwidthError(msg.str());
    }
  }
}

double boundary_factor(const BaseKernel& kernel, double v, double h) {
  if (!(h > 0.0) || !(h < 1.0)) {
    std::ostringstream msg;
    msg << "bandwidth " << h << " outside (0, 1)";
    throw InvalidBandwidthError(msg.str());
  }
  const double mass = kernel.cdf((1.0 - v) / h) - kernel.cdf((0.0 - v) / h);
  return 1.0 / mass;
}

double boundary_kernel(const BaseKernel& kernel, double u, double v, double h) {
  return boundary_factor(kernel, v, h) * kernel((u - v) / h) / h;
}

Eigen::VectorXd kde_1d(const Eigen::Ref<const Eigen::VectorXd>& samples, double h,
                       const Grid& grid, const BaseKernel& kernel) {
  const Eigen::Index n = samples.size();
  if (n == 0) throw ConfigError("kde_1d: empty sample");
  Bandwidths::constant(1, h).validate();
  const int g = grid.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(g);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double c = boundary_factor(kernel, samples(i), h) / h;
    for (int a = 0; a < g; ++a) {
      out(a) += c * kernel((grid.points()(a) - samples(i)) / h);
    }
  }
  out /= double(n);
  return out;
}

Eigen::MatrixXd kde_2d(const Eigen::Ref<const Eigen::VectorXd>& samples_j,
                       const Eigen::Ref<const Eigen::VectorXd>& samples_k, double h_j,
                       double h_k, const Grid& grid, const BaseKernel& kernel) {
  if (samples_j.size() != samples_k.size())
    throw ConfigError("kde_2d: sample vectors have different lengths");
  const Eigen::Index n = samples_j.size();
  if (n == 0) throw ConfigError("kde_2d: empty sample");
  const int g = grid.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(g, g);
  Eigen::VectorXd row_j(g), row_k(g);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double cj = boundary_factor(kernel, samples_j(i), h_j) / h_j;
    const double ck = boundary_factor(kernel, samples_k(i), h_k) / h_k;
    for (int a = 0; a < g; ++a) {
      row_j(a) = cj * kernel((grid.points()(a) - samples_j(i)) / h_j);
      row_k(a) = ck * kernel((grid.points()(a) - samples_k(i)) / h_k);
    }
    out.noalias() += row_j * row_k.transpose();
  }
  out /= double(n);
  return out;
}

Eigen::VectorXd nw_marginal(const Eigen::Ref<const Eigen::VectorXd>& responses,
                            const Eigen::Ref<const Eigen::VectorXd>& z_col, double h,
                            const Grid& grid, const BaseKernel& kernel) {
  const Eigen::Index n = responses.size();
  if (n == 0) throw ConfigError("nw_marginal: empty sample");
  if (z_col.size() != n) throw ConfigError("nw_marginal: length mismatch");
  Bandwidths::constant(1, h).validate();
  const int g = grid.size();
  Eigen::VectorXd num = Eigen::VectorXd::Zero(g);
  Eigen::VectorXd den = Eigen::VectorXd::Zero(g);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double c = boundary_factor(kernel, z_col(i), h) / h;
    for (int a = 0; a < g; ++a) {
      const double w = c * kernel((grid.points()(a) - z_col(i)) / h);
      num(a) += w * responses(i);
      den(a) += w;
    }
  }
  num /= double(n);
  den /= double(n);
  const double guard = denominator_guard(n, h);
  Eigen::VectorXd out(g);
  for (int a = 0; a < g; ++a) {
    if (den(a) <= guard) {
      std::ostringstream msg;
      msg << "nw_marginal: degenerate window at grid point " << a << " (z = "
          << grid.points()(a) << ", density " << den(a) << ")";
      throw DegenerateWindowError(msg.str(), {long(a)});
    }
    out(a) = num(a) / den(a);
  }
  return out;
}

Eigen::VectorXd nw_full(const Eigen::Ref<const Eigen::VectorXd>& responses,
                        const Eigen::Ref<const Eigen::MatrixXd>& z, const Bandwidths& bw,
                        const Eigen::Ref<const Eigen::MatrixXd>& eval_points,
                        const BaseKernel& kernel, int min_window_count) {
  const Eigen::Index n = responses.size();
  const int d = int(z.cols());
  if (d < 1) throw ConfigError("nw_full: needs at least one coordinate");
  if (z.rows() != n) throw ConfigError("nw_full: length mismatch");
  if (eval_points.cols() != d) throw ConfigError("nw_full: eval point dimension mismatch");
  bw.validate();
  if (bw.dim() != d) throw ConfigError("nw_full: bandwidth dimension mismatch");

  // Boundary factors depend only on the data, precompute per column.
  Eigen::MatrixXd cfac(n, d);
  double inv_h_prod = 1.0;
  for (int j = 0; j < d; ++j) {
    inv_h_prod /= bw.h(j);
    for (Eigen::Index i = 0; i < n; ++i)
      cfac(i, j) = boundary_factor(kernel, z(i, j), bw.h(j));
  }

  double guard = 1e-10 / double(n) * inv_h_prod;
  const Eigen::Index m = eval_points.rows();
  Eigen::VectorXd out(m);
  std::vector<long> bad;
  for (Eigen::Index e = 0; e < m; ++e) {
    double num = 0.0, den = 0.0;
    int count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double w = inv_h_prod;
      for (int j = 0; j < d; ++j) {
        w *= cfac(i, j) * kernel((eval_points(e, j) - z(i, j)) / bw.h(j));
        if (w == 0.0) break;
      }
      if (w > 0.0) {
        num += w * responses(i);
        den += w;
        ++count;
      }
    }
    den /= double(n);
    num /= double(n);
    if (den <= guard || count < min_window_count) {
      bad.push_back(long(e));
      out(e) = std::numeric_limits<double>::quiet_NaN();
    } else {
      out(e) = num / den;
    }
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "nw_full: " << bad.size() << " evaluation point(s) with degenerate windows, rows:";
    for (std::size_t k = 0; k < bad.size() && k < 10; ++k) msg << ' ' << bad[k];
    if (bad.size() > 10) msg << " ...";
    throw DegenerateWindowError(msg.str(), std::move(bad));
  }
  return out;
}

double rot_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& z_col) {
  const Eigen::Index n = z_col.size();
  if (n < 2) throw ConfigError("rot_bandwidth: need at least two observations");
  const double sd = sample_sd(z_col);
  if (sd <= 0.0) throw ConfigError("rot_bandwidth: constant column");
  std::vector<double> s(z_col.data(), z_col.data() + n);
  std::sort(s.begin(), s.end());
  double max_gap = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) max_gap = std::max(max_gap, s[i] - s[i - 1]);
  const double h = std::max(1.06 * sd * std::pow(double(n), -0.2), 0.6 * max_gap);
  return std::clamp(h, 0.01, 0.5);
}

namespace {

double phi4(double u) {
  const double u2 = u * u;
  return ((u2 - 6.0) * u2 + 3.0) * norm_pdf(u);
}

double phi6(double u) {
  const double u2 = u * u;
  return (((u2 - 15.0) * u2 + 45.0) * u2 - 15.0) * norm_pdf(u);
}

}  // namespace

SjBandwidth sj_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& samples) {
  const Eigen::Index n = samples.size();
  if (n < 10) throw ConfigError("sj_bandwidth: need at least 10 observations");
  const double sd = sample_sd(samples);
  if (sd <= 0.0) throw ConfigError("sj_bandwidth: constant sample");
  const double q = iqr(samples);
  const double lambda = q > 0.0 ? std::min(sd, q / 1.349) : sd;
  const double silverman = 0.9 * std::min(sd, q / 1.34) * std::pow(double(n), -0.2);

  // Binned pair counts: wts[m] = number of unordered pairs at lag m bins.
  const int nb = 1000;
  const double lo_x = samples.minCoeff(), hi_x = samples.maxCoeff();
  const double delta = (hi_x - lo_x) / double(nb - 1);
  if (!(delta > 0.0)) throw ConfigError("sj_bandwidth: constant sample");
  Eigen::VectorXd cnt = Eigen::VectorXd::Zero(nb);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto b = static_cast<int>((samples(i) - lo_x) / delta);
    cnt(std::min(b, nb - 1)) += 1.0;
  }
  Eigen::VectorXd wts(nb);
  for (int m = 0; m < nb; ++m) {
    wts(m) = cnt.head(nb - m).dot(cnt.tail(nb - m));
  }
  wts(0) = 0.5 * (wts(0) - double(n));

  const double nn = double(n) * double(n - 1);
  auto sd_functional = [&](double alpha) {
    double acc = 0.5 * double(n) * phi4(0.0);
    for (int m = 0; m < nb; ++m) acc += wts(m) * phi4(double(m) * delta / alpha);
    return std::max(2.0 * acc / (nn * std::pow(alpha, 5)), 1e-300);
  };
  auto td_functional = [&](double b) {
    double acc = 0.5 * double(n) * phi6(0.0);
    for (int m = 0; m < nb; ++m) acc += wts(m) * phi6(double(m) * delta / b);
    return -2.0 * acc / (nn * std::pow(b, 7));
  };

  const double a0 = 0.920 * lambda * std::pow(double(n), -1.0 / 7.0);
  const double b0 = 0.912 * lambda * std::pow(double(n), -1.0 / 9.0);
  const double sd_hat = sd_functional(a0);
  const double td_hat = std::abs(td_functional(b0));
  if (!(td_hat > 0.0)) return {silverman, true};

  static const double rk = 0.28209479177387814;  // 1 / (2 sqrt(pi))
  auto objective = [&](double h) {
    const double alpha2 = 1.357 * std::pow(sd_hat / td_hat, 1.0 / 7.0) * std::pow(h, 5.0 / 7.0);
    return std::pow(rk / (double(n) * sd_functional(alpha2)), 0.2) - h;
  };

  double lo = 0.01 * sd * std::pow(double(n), -0.2);
  double hi = 10.0 * sd * std::pow(double(n), -0.2);
  double flo = objective(lo);
  const double fhi = objective(hi);
  if (flo * fhi > 0.0) return {silverman, true};
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (objective(mid) * flo <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
      flo = objective(lo);
    }
  }
  return {0.5 * (lo + hi), false};
}

}  // namespace splam

#include "splam/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>
#include <vector>

namespace splam {

double mean(const Eigen::Ref<const Eigen::VectorXd>& v) { return v.mean(); }

double sample_sd(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const auto n = v.size();
  if (n < 2) return 0.0;
  const double m = v.mean();
  return std::sqrt((v.array() - m).square().sum() / double(n - 1));
}

double iqr(const Eigen::Ref<const Eigen::VectorXd>& v) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end());
  auto quantile = [&](double p) {
    const double idx = p * double(s.size() - 1);
    const auto lo = static_cast<std::size_t>(idx);
    const auto hi = std::min(lo + 1, s.size() - 1);
    const double frac = idx - double(lo);
    return (1.0 - frac) * s[lo] + frac * s[hi];
  };
  return quantile(0.75) - quantile(0.25);
}

double skewness(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double m = v.mean();
  const Eigen::ArrayXd c = v.array() - m;
  const double s2 = c.square().mean();
  if (s2 <= 0.0) return 0.0;
  return c.cube().mean() / std::pow(s2, 1.5);
}

double norm_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt_rec(const std::function<double(double)>& f, double a, double fa, double b,
                 double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, fa, m, fm, flm);
  const double right = simpson(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adapt_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adapt_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = simpson(a, fa, b, fb, fm);
  return adapt_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

void parallel_for(long n, int n_threads, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  int workers = n_threads > 0 ? n_threads : int(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = int(std::min<long>(workers, n));
  if (workers == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  auto run = [&]() {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::string format_full(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace splam

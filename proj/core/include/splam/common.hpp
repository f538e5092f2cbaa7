#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>

namespace splam {

double mean(const Eigen::Ref<const Eigen::VectorXd>& v);
double sample_sd(const Eigen::Ref<const Eigen::VectorXd>& v);
//! Interquartile range using linear interpolation between order statistics.
double iqr(const Eigen::Ref<const Eigen::VectorXd>& v);
double skewness(const Eigen::Ref<const Eigen::VectorXd>& v);

//! Standard normal pdf / cdf.
double norm_pdf(double x);
double norm_cdf(double x);

//! Recursive adaptive Simpson integration. Splits until the local error
//! estimate is below tol; handles integrands with kinks by refinement.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 40);

//! Runs fn(0..n-1) on up to n_threads workers (0 = hardware concurrency).
//! Work items are claimed through an atomic counter, so results written by
//! index are deterministic regardless of scheduling.
void parallel_for(long n, int n_threads, const std::function<void(long)>& fn);

//! Shortest decimal form that round-trips a double (17 significant digits).
std::string format_full(double x);

}  // namespace splam

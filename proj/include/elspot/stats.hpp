#pragma once

#include <cstddef>
#include <vector>

namespace elspot {

// Standard normal distribution function, accurate in both tails.
double normal_cdf(double x);
double normal_pdf(double x);

// Inverse of normal_cdf (Wichura's AS 241, double precision).
double normal_quantile(double p);

// Empirical p-quantile with linear interpolation between order statistics
// (type-7 convention). `sorted` must be ascending and nonempty.
double quantile_sorted(const std::vector<double>& sorted, double p);

double mean(const std::vector<double>& x);
double stddev(const std::vector<double>& x);

// One-sample Kolmogorov-Smirnov statistic against U(0,1).
double ks_statistic_uniform(std::vector<double> u);

// Critical value for the one-sample KS test (Stephens' approximation).
double ks_critical(std::size_t n, double alpha);

}  // namespace elspot

#pragma once

// Sample statistics used by the Monte Carlo harness: k-statistics with
// jackknife standard errors, Kolmogorov distances and log-log slope fits.

#include <span>
#include <vector>

namespace sphereqv {

/// Pairwise (cascade) sum in a fixed order.
double pairwise_sum(std::span<const double> values);

struct CumulantEstimate {
    std::vector<double> k;   ///< k[p] for p = 1 .. p_max (k[0] unused): k1 is the mean
    std::vector<double> se;  ///< jackknife standard errors, same indexing
};

/// Unbiased k-statistics k1 .. k_{p_max} (p_max in [2, 4]) with delete-one-batch
/// jackknife standard errors over `batches` contiguous batches.
/// Throws std::invalid_argument when fewer than 10 p_max samples are given.
CumulantEstimate empirical_cumulants(std::span<const double> samples, int p_max, int batches = 100);

/// sup_x |F_n(x) - Phi(x)|.
double ks_normal(std::span<const double> samples);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Asymptotic critical value c(alpha) sqrt((n1+n2)/(n1 n2)), c(alpha) = sqrt(-ln(alpha/2)/2).
double ks_two_sample_critical(std::size_t n1, std::size_t n2, double alpha);

double standard_normal_cdf(double x);

double median(std::vector<double> values);

enum class LogCorrection { none, divide_by_log };

struct SlopeFit {
    double slope = 0.0;
    double std_error = 0.0;
    double intercept = 0.0;
};

/// Least-squares slope of log y (or log(y / log x)) against log x.
SlopeFit loglog_slope(std::span<const double> xs, std::span<const double> ys,
                      LogCorrection correction = LogCorrection::none);

}  // namespace sphereqv

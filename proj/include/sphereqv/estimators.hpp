#pragma once

// Estimators of the angular power spectrum from one quadratic variation, and
// the two-time Hurst estimator.

#include "sphereqv/moments.hpp"

#include <string>
#include <vector>

namespace sphereqv {

enum class EstimatorVariant { exact, v1, v2, v3, classical };

std::string variant_name(EstimatorVariant variant);

struct EstimateResult {
    double value = 0.0;
    double normalizer = 0.0;  ///< denominator applied to the statistic
    EstimatorVariant variant = EstimatorVariant::exact;
    double c = 0.0;           ///< l/N limit for v2
    double bias_exact = 0.0;  ///< E[value / C_l] - 1; zero for exact and classical
};

/// value = v / exact_mean_vnl(l, 1, N); unbiased for C_l.
EstimateResult estimate_cl(double v, int ell, int n);

/// Variant 1, 2 or 3 with the regime denominator; c is used by variant 2.
EstimateResult estimate_cl_variant(double v, int ell, int n, int variant, double c = 0.0);

/// Mean of the 2l+1 squared real-basis coefficients.
EstimateResult estimate_cl_classical(const std::vector<double>& coeffs, int ell);

struct HurstEstimate {
    double value = 0.0;
    bool in_range = false;  ///< value lies in (0, 1)
};

/// log(v_t / v_s) / (2 log(t / s)). Not clamped.
HurstEstimate estimate_hurst(double v_t, double v_s, double t, double s);

}  // namespace sphereqv

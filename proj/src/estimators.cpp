#include "sphereqv/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace sphereqv {

std::string variant_name(EstimatorVariant variant) {
    switch (variant) {
        case EstimatorVariant::exact: return "exact";
        case EstimatorVariant::v1: return "v1";
        case EstimatorVariant::v2: return "v2";
        case EstimatorVariant::v3: return "v3";
        case EstimatorVariant::classical: return "classical";
    }
    return "unknown";
}

EstimateResult estimate_cl(double v, int ell, int n) {
    if (ell < 1 || n < 1) throw std::invalid_argument("estimate_cl: need l >= 1 and N >= 1");
    if (!(v >= 0.0)) throw std::invalid_argument("estimate_cl: quadratic variation must be non-negative");
    const double normalizer = exact_mean_vnl(ell, 1.0, n);
    if (!(normalizer > 0.0)) throw std::domain_error("estimate_cl: degenerate normalizer");
    EstimateResult r;
    r.value = v / normalizer;
    r.normalizer = normalizer;
    r.variant = EstimatorVariant::exact;
    return r;
}

EstimateResult estimate_cl_variant(double v, int ell, int n, int variant, double c) {
    if (!(v >= 0.0)) throw std::invalid_argument("estimate_cl_variant: quadratic variation must be non-negative");
    const double normalizer = variant_normalizer(variant, ell, n, c);
    if (!(normalizer > 0.0)) throw std::domain_error("estimate_cl_variant: degenerate normalizer");
    EstimateResult r;
    r.value = v / normalizer;
    r.normalizer = normalizer;
    r.c = variant == 2 ? c : 0.0;
    switch (variant) {
        case 1:
            r.variant = EstimatorVariant::v1;
            r.bias_exact = estimator_bias(1, ell, n, RegimeTag::faster());
            break;
        case 2:
            r.variant = EstimatorVariant::v2;
            r.bias_exact = estimator_bias(2, ell, n, RegimeTag::comparable(c));
            break;
        default:
            r.variant = EstimatorVariant::v3;
            r.bias_exact = estimator_bias(3, ell, n, RegimeTag::slower());
            break;
    }
    return r;
}

EstimateResult estimate_cl_classical(const std::vector<double>& coeffs, int ell) {
    if (ell < 0) throw std::domain_error("estimate_cl_classical: negative degree");
    if (coeffs.size() != static_cast<std::size_t>(2 * ell + 1))
        throw std::invalid_argument("estimate_cl_classical: expected 2l+1 coefficients");
    double sum = 0.0;
    for (double a : coeffs) sum += a * a;
    EstimateResult r;
    r.normalizer = static_cast<double>(coeffs.size());
    r.value = sum / r.normalizer;
    r.variant = EstimatorVariant::classical;
    return r;
}

HurstEstimate estimate_hurst(double v_t, double v_s, double t, double s) {
    if (!(v_t > 0.0) || !(v_s > 0.0)) throw std::invalid_argument("estimate_hurst: quadratic variations must be positive");
    if (!(t > 0.0) || !(s > 0.0) || t == s) throw std::invalid_argument("estimate_hurst: times must be distinct positives");
    HurstEstimate h;
    h.value = std::log(v_t / v_s) / (2.0 * std::log(t / s));
    h.in_range = h.value > 0.0 && h.value < 1.0;
    return h;
}

}  // namespace sphereqv

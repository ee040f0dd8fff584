#pragma once

// Exact and asymptotic moments of the quadratic variations V_{N,l} and V_N.
// Exact values come from the increment Gram matrix Sigma: E V = tr Sigma and
// kappa_p(V) = 2^{p-1} (p-1)! tr(Sigma^p).

#include "sphereqv/covariance.hpp"

#include <string>
#include <vector>

namespace sphereqv {

enum class Regime { fixed_ell, ell_faster, ell_comparable, ell_slower };

/// Which asymptotic regime a (l, N) pair is taken to belong to. Always
/// supplied by the caller; a single pair does not determine a regime.
struct RegimeTag {
    Regime kind = Regime::fixed_ell;
    double c = 0.0;  ///< limit of l/N, used by ell_comparable only

    static RegimeTag fixed() { return {Regime::fixed_ell, 0.0}; }
    static RegimeTag faster() { return {Regime::ell_faster, 0.0}; }
    static RegimeTag comparable(double c);
    static RegimeTag slower() { return {Regime::ell_slower, 0.0}; }

    /// "fixed_ell", "ell_faster", "ell_comparable", "ell_slower".
    std::string name() const;
    static RegimeTag parse(const std::string& name, double c = 0.0);
};

struct MomentReport {
    double mean = 0.0;
    double variance = 0.0;
    std::vector<double> cumulants;  ///< normalized kappa_p(F_N) for p = 2 .. p_max
    RegimeTag regime;
};

/// 2N c (2l+1)/(4 pi) (1 - P_l(cos(pi/(2N)))).
double exact_mean_vnl(int ell, double c_ell, int n);

/// 2 ||Sigma||_F^2.
double exact_var_vnl(const IncrementGram& gram);

/// tr(Sigma^k) for k = 1 .. p_max (p_max <= 8), using at most three matrix products.
std::vector<double> trace_powers(const IncrementGram& gram, int p_max);

/// kappa_p(V - E V) = 2^{p-1} (p-1)! tr(Sigma^p), 2 <= p <= 8.
double trace_cumulant(const IncrementGram& gram, int p);

/// kappa_p(V) / Var(V)^{p/2}.
double normalized_cumulant(const IncrementGram& gram, int p);

/// sqrt(kappa_4(F_N) / 6).
double fourth_moment_bound(const IncrementGram& gram);

MomentReport moment_report(const IncrementGram& gram, int p_max, RegimeTag regime);

/// g_l(x) = l(l+1) P_l(cos(x pi/2)) - P'_l(cos(x pi/2)) cos(x pi/2).
double limit_profile(int ell, double x);

/// ((2l+1)/(4 pi))^2 (pi^4/16) int_0^1 g_l(x)^2 dx by Gauss-Legendre.
/// Writes a warning to std::clog when quad_nodes < 10 l.
double k_ell_constant(int ell, int quad_nodes);

/// Same prefactor times int_0^1 int_0^1 g_l(|x-y|)^2 dx dy; with this constant
/// N^2 Var(V_{N,l}) / (2 c^2) converges.
double k_ell_variance_constant(int ell, int quad_nodes);

/// How the limiting cumulant is normalized: by int_0^1 g^2 (single_integral)
/// or by the double integral int int g(|x-y|)^2 (double_integral), which is
/// the limit of the normalized trace cumulants.
enum class NcltNormalization { single_integral, double_integral };

/// 2^{p-1}(p-1)! / (2^{p/2} I_2^{p/2}) * int_{[0,1]^p} g(|x1-x2|) ... g(|xp-x1|) dx,
/// p in {3, 4}. The p-fold integral is evaluated as tr((G W)^p) with G the
/// kernel matrix on quad_nodes Gauss-Legendre nodes, which equals the tensor rule.
double nclt_limit_cumulant(int ell, int p, int quad_nodes,
                           NcltNormalization normalization = NcltNormalization::single_integral);

double asymptotic_mean(RegimeTag regime, int ell, double c_ell, int n);
double asymptotic_var(RegimeTag regime, int ell, double c_ell, int n);

/// Predicted growth of the full-field moments under C_l ~ l^{-2-eps}:
/// E V_N ~ N^{1-eps}, Var V_N ~ N^{1-2 eps} log N.
struct MomentOrders {
    double mean_exponent = 0.0;
    double var_exponent = 0.0;
    bool var_log_factor = true;

    double mean_order(double n) const;
    double var_order(double n) const;
};

MomentOrders fullfield_moment_orders(double epsilon);

/// Exact E[C_hat^(variant) / C_l] - 1 for variants 1, 2, 3. The regime must
/// match the variant (1: ell_faster, 2: ell_comparable, 3: ell_slower);
/// variant 2 takes c from the regime.
double estimator_bias(int variant, int ell, int n, RegimeTag regime);

/// Denominator of variant 1, 2 or 3 per unit C_l.
double variant_normalizer(int variant, int ell, int n, double c);

}  // namespace sphereqv

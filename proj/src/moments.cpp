#include "sphereqv/moments.hpp"

#include "sphereqv/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace sphereqv {

using specfun::kPi;

namespace {

double cumulant_factor(int p) {
    double f = std::ldexp(1.0, p - 1);
    for (int k = 2; k < p; ++k) f *= k;
    return f;
}

void check_p(int p) {
    if (p < 2 || p > 8) throw std::invalid_argument("cumulant order must lie in [2, 8], got " + std::to_string(p));
}

double frobenius_dot(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return a.cwiseProduct(b).sum(); }

// Prefactor ((2l+1)/(4 pi))^2 pi^4 / 16.
double k_prefactor(int ell) {
    const double w = (2.0 * ell + 1.0) / (4.0 * kPi);
    return w * w * std::pow(kPi, 4) / 16.0;
}

void warn_nodes(const char* what, int ell, int nodes) {
    if (nodes < 10 * ell)
        std::clog << "warning: " << what << ": " << nodes << " quadrature nodes for l = " << ell
                  << " (recommended at least " << 10 * ell << ")\n";
}

}  // namespace

RegimeTag RegimeTag::comparable(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("ell_comparable regime needs c > 0");
    return {Regime::ell_comparable, c};
}

std::string RegimeTag::name() const {
    switch (kind) {
        case Regime::fixed_ell: return "fixed_ell";
        case Regime::ell_faster: return "ell_faster";
        case Regime::ell_comparable: return "ell_comparable";
        case Regime::ell_slower: return "ell_slower";
    }
    return "unknown";
}

RegimeTag RegimeTag::parse(const std::string& name, double c) {
    if (name == "fixed_ell") return fixed();
    if (name == "ell_faster") return faster();
    if (name == "ell_comparable") return comparable(c);
    if (name == "ell_slower") return slower();
    throw std::invalid_argument("unknown regime '" + name + "'");
}

double exact_mean_vnl(int ell, double c_ell, int n) {
    if (n < 1) throw std::invalid_argument("exact_mean_vnl: N must be positive");
    if (ell < 0) throw std::domain_error("exact_mean_vnl: negative degree");
    const double w = c_ell * (2.0 * ell + 1.0) / (4.0 * kPi);
    return 2.0 * n * w * specfun::legendre_one_minus_p_cos(ell, kPi / (2.0 * n));
}

double exact_var_vnl(const IncrementGram& gram) { return 2.0 * gram.sigma.squaredNorm(); }

std::vector<double> trace_powers(const IncrementGram& gram, int p_max) {
    if (p_max < 1 || p_max > 8) throw std::invalid_argument("trace_powers: p_max must lie in [1, 8]");
    const Eigen::MatrixXd& s1 = gram.sigma;
    std::vector<double> tr(static_cast<std::size_t>(p_max) + 1, 0.0);
    tr[1] = s1.trace();
    if (p_max >= 2) tr[2] = s1.squaredNorm();
    if (p_max <= 2) return tr;
    const Eigen::MatrixXd s2 = s1 * s1;
    tr[3] = frobenius_dot(s2, s1);
    if (p_max >= 4) tr[4] = s2.squaredNorm();
    if (p_max <= 4) return tr;
    const Eigen::MatrixXd s4 = s2 * s2;
    tr[5] = frobenius_dot(s4, s1);
    if (p_max >= 6) tr[6] = frobenius_dot(s4, s2);
    if (p_max >= 7) {
        const Eigen::MatrixXd s3 = s2 * s1;
        tr[7] = frobenius_dot(s4, s3);
    }
    if (p_max >= 8) tr[8] = s4.squaredNorm();
    return tr;
}

double trace_cumulant(const IncrementGram& gram, int p) {
    check_p(p);
    return cumulant_factor(p) * trace_powers(gram, p)[static_cast<std::size_t>(p)];
}

double normalized_cumulant(const IncrementGram& gram, int p) {
    check_p(p);
    const auto tr = trace_powers(gram, p);
    const double var = 2.0 * tr[2];
    if (!(var > 0.0)) throw std::domain_error("normalized_cumulant: zero variance");
    return cumulant_factor(p) * tr[static_cast<std::size_t>(p)] / std::pow(var, 0.5 * p);
}

double fourth_moment_bound(const IncrementGram& gram) { return std::sqrt(normalized_cumulant(gram, 4) / 6.0); }

MomentReport moment_report(const IncrementGram& gram, int p_max, RegimeTag regime) {
    check_p(p_max);
    const auto tr = trace_powers(gram, p_max);
    MomentReport r;
    r.mean = tr[1];
    r.variance = 2.0 * tr[2];
    r.regime = regime;
    for (int p = 2; p <= p_max; ++p)
        r.cumulants.push_back(r.variance > 0.0 ? cumulant_factor(p) * tr[static_cast<std::size_t>(p)] / std::pow(r.variance, 0.5 * p) : 0.0);
    return r;
}

double limit_profile(int ell, double x) {
    const double u = std::cos(x * kPi / 2.0);
    return ell * (ell + 1.0) * specfun::legendre_p(ell, u) - specfun::legendre_p_deriv(ell, u) * u;
}

double k_ell_constant(int ell, int quad_nodes) {
    if (ell < 1) throw std::domain_error("k_ell_constant: degree must be at least 1");
    warn_nodes("k_ell_constant", ell, quad_nodes);
    const auto rule = specfun::gauss_legendre(quad_nodes, 0.0, 1.0);
    double integral = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double g = limit_profile(ell, rule.nodes[i]);
        integral += rule.weights[i] * g * g;
    }
    return k_prefactor(ell) * integral;
}

double k_ell_variance_constant(int ell, int quad_nodes) {
    if (ell < 1) throw std::domain_error("k_ell_variance_constant: degree must be at least 1");
    warn_nodes("k_ell_variance_constant", ell, quad_nodes);
    // int int g(|x-y|)^2 = 2 int_0^1 (1-x) g(x)^2 dx
    const auto rule = specfun::gauss_legendre(quad_nodes, 0.0, 1.0);
    double integral = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double g = limit_profile(ell, rule.nodes[i]);
        integral += rule.weights[i] * 2.0 * (1.0 - rule.nodes[i]) * g * g;
    }
    return k_prefactor(ell) * integral;
}

double nclt_limit_cumulant(int ell, int p, int quad_nodes, NcltNormalization normalization) {
    if (p != 3 && p != 4) throw std::invalid_argument("nclt_limit_cumulant: only p = 3 and p = 4 are supported");
    if (ell < 1) throw std::domain_error("nclt_limit_cumulant: degree must be at least 1");
    warn_nodes("nclt_limit_cumulant", ell, quad_nodes);
    const auto rule = specfun::gauss_legendre(quad_nodes, 0.0, 1.0);
    const int m = quad_nodes;
    // symmetric form W^{1/2} G W^{1/2}
    Eigen::MatrixXd a(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            a(i, j) = std::sqrt(rule.weights[static_cast<std::size_t>(i)] * rule.weights[static_cast<std::size_t>(j)]) *
                      limit_profile(ell, std::abs(rule.nodes[static_cast<std::size_t>(i)] - rule.nodes[static_cast<std::size_t>(j)]));
    const Eigen::MatrixXd a2 = a * a;
    const double integral_p = p == 3 ? frobenius_dot(a2, a) : a2.squaredNorm();

    double i2 = 0.0;
    if (normalization == NcltNormalization::double_integral) {
        i2 = a.squaredNorm();
    } else {
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double g = limit_profile(ell, rule.nodes[i]);
            i2 += rule.weights[i] * g * g;
        }
    }
    return cumulant_factor(p) * integral_p / std::pow(2.0 * i2, 0.5 * p);
}

double asymptotic_mean(RegimeTag regime, int ell, double c_ell, int n) {
    if (n < 1 || ell < 1) throw std::invalid_argument("asymptotic_mean: need l >= 1 and N >= 1");
    const double base = 2.0 * n * c_ell * (2.0 * ell + 1.0) / (4.0 * kPi);
    const double ratio = static_cast<double>(ell) / n;
    switch (regime.kind) {
        case Regime::fixed_ell: return kPi / 16.0 * (2.0 * ell + 1.0) * ell * (ell + 1.0) * c_ell / n;
        case Regime::ell_faster: return base;
        case Regime::ell_comparable: return base * (1.0 - specfun::bessel_j(0, kPi * regime.c / 2.0));
        case Regime::ell_slower: return base * kPi * kPi / 8.0 * ratio * ratio;
    }
    return 0.0;
}

double asymptotic_var(RegimeTag regime, int ell, double c_ell, int n) {
    if (n < 1 || ell < 1) throw std::invalid_argument("asymptotic_var: need l >= 1 and N >= 1");
    const double c2 = c_ell * c_ell;
    const double nn = static_cast<double>(n);
    switch (regime.kind) {
        case Regime::fixed_ell: return 2.0 * k_ell_constant(ell, std::max(64, 10 * ell)) * c2 / (nn * nn);
        case Regime::ell_faster:
        case Regime::ell_comparable: return 2.0 / std::pow(kPi, 4) * c2 * ell * nn * nn * std::log(nn);
        case Regime::ell_slower: return c2 * kPi / 128.0 * std::pow(static_cast<double>(ell), 5) / (nn * nn) * std::log(nn);
    }
    return 0.0;
}

double MomentOrders::mean_order(double n) const { return std::pow(n, mean_exponent); }

double MomentOrders::var_order(double n) const {
    return std::pow(n, var_exponent) * (var_log_factor ? std::log(n) : 1.0);
}

MomentOrders fullfield_moment_orders(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw std::invalid_argument("fullfield_moment_orders: epsilon must lie in (0, 0.5)");
    return {1.0 - epsilon, 1.0 - 2.0 * epsilon, true};
}

double variant_normalizer(int variant, int ell, int n, double c) {
    if (n < 1 || ell < 1) throw std::invalid_argument("variant_normalizer: need l >= 1 and N >= 1");
    const double base = 2.0 * n * (2.0 * ell + 1.0) / (4.0 * kPi);
    const double ratio = static_cast<double>(ell) / n;
    switch (variant) {
        case 1: return base;
        case 2:
            if (!(c > 0.0)) throw std::invalid_argument("variant 2 needs c > 0");
            return base * (1.0 - specfun::bessel_j(0, kPi * c / 2.0));
        case 3: return base * kPi * kPi / 8.0 * ratio * ratio;
        default: throw std::invalid_argument("estimator variant must be 1, 2 or 3");
    }
}

double estimator_bias(int variant, int ell, int n, RegimeTag regime) {
    const Regime expected = variant == 1 ? Regime::ell_faster : variant == 2 ? Regime::ell_comparable : Regime::ell_slower;
    if (variant < 1 || variant > 3) throw std::invalid_argument("estimator variant must be 1, 2 or 3");
    if (regime.kind != expected)
        throw std::invalid_argument("estimator variant " + std::to_string(variant) + " does not match regime " + regime.name());
    if (variant == 1) return -specfun::legendre_p(ell, std::cos(kPi / (2.0 * n)));
    return exact_mean_vnl(ell, 1.0, n) / variant_normalizer(variant, ell, n, regime.c) - 1.0;
}

}  // namespace sphereqv

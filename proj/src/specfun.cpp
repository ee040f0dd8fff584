#include "sphereqv/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sphereqv::specfun {

namespace {

void check_degree(int ell) {
    if (ell < 0) throw std::domain_error("Legendre degree must be non-negative, got " + std::to_string(ell));
}

void check_unit_interval(double x) {
    if (!(std::abs(x) <= 1.0)) throw std::domain_error("Legendre argument outside [-1, 1]: " + std::to_string(x));
}

double bessel_series(int order, double x) {
    const double half = 0.5 * x;
    const double q = -half * half;
    // leading term (x/2)^n / n!
    double term = order == 0 ? 1.0 : half * half / 2.0;
    double sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * static_cast<double>(k + order));
        sum += term;
        if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum))) break;
    }
    return sum;
}

// Miller's algorithm normalized with 1 = J0 + 2 (J2 + J4 + ...).
double bessel_miller(int order, double x) {
    const int start = 2 * (static_cast<int>(x / 2.0) + 40);
    double next = 0.0;
    double cur = 1e-30;  // J_start, arbitrary scale
    double norm = 2.0 * cur;
    double j2 = 0.0;
    for (int n = start; n >= 1; --n) {
        const double prev = (2.0 * n / x) * cur - next;
        next = cur;
        cur = prev;  // J_{n-1}
        const int idx = n - 1;
        if (idx == 2) j2 = cur;
        if (idx > 0 && idx % 2 == 0) norm += 2.0 * cur;
        if (std::abs(cur) > 1e250) {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            j2 *= 1e-250;
        }
    }
    norm += cur;
    return (order == 0 ? cur : j2) / norm;
}

double bessel_hankel(int order, double x) {
    const double mu = 4.0 * order * order;
    const double z = 8.0 * x;
    double p = 1.0;
    double q = 0.0;
    double term = 1.0;
    double last = 1.0;
    for (int k = 1; k < 100; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= (mu - odd * odd) / (k * z);
        if (std::abs(term) > std::abs(last) && k > 2) break;  // asymptotic series turned
        if (k % 2 == 0) {
            p += ((k / 2) % 2 == 0 ? 1.0 : -1.0) * term;
        } else {
            q += (((k - 1) / 2) % 2 == 0 ? 1.0 : -1.0) * term;
        }
        last = term;
        if (std::abs(term) < 1e-17) break;
    }
    const double chi = x - (0.5 * order + 0.25) * kPi;
    return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

double legendre_p(int ell, double x) {
    check_degree(ell);
    check_unit_interval(x);
    if (ell == 0) return 1.0;
    double prev = 1.0;
    double cur = x;
    for (int l = 1; l < ell; ++l) {
        const double next = ((2.0 * l + 1.0) * x * cur - l * prev) / (l + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

double legendre_p_deriv(int ell, double x) {
    check_degree(ell);
    check_unit_interval(x);
    if (x == 1.0) return 0.5 * ell * (ell + 1.0);
    if (x == -1.0) return ((ell % 2 == 0) ? -1.0 : 1.0) * 0.5 * ell * (ell + 1.0);
    if (ell == 0) return 0.0;
    double p_prev = 1.0, p_cur = x;      // P_{l-1}, P_l
    double d_prev = 0.0, d_cur = 1.0;    // P'_{l-1}, P'_l
    for (int l = 1; l < ell; ++l) {
        const double p_next = ((2.0 * l + 1.0) * x * p_cur - l * p_prev) / (l + 1.0);
        const double d_next = d_prev + (2.0 * l + 1.0) * p_cur;
        p_prev = p_cur;
        p_cur = p_next;
        d_prev = d_cur;
        d_cur = d_next;
    }
    return d_cur;
}

void legendre_p_sequence(int ell_max, double x, std::span<double> out) {
    check_degree(ell_max);
    check_unit_interval(x);
    if (out.size() != static_cast<std::size_t>(ell_max) + 1)
        throw std::invalid_argument("legendre_p_sequence: output span has wrong length");
    out[0] = 1.0;
    if (ell_max == 0) return;
    out[1] = x;
    for (int l = 1; l < ell_max; ++l)
        out[l + 1] = ((2.0 * l + 1.0) * x * out[l] - l * out[l - 1]) / (l + 1.0);
}

double legendre_one_minus_p_cos(int ell, double theta) {
    check_degree(ell);
    if (ell == 0) return 0.0;
    const double s = std::sin(0.5 * theta);
    const double u = 2.0 * s * s;  // 1 - cos(theta)
    const double x = std::cos(theta);
    double prev = 0.0;
    double cur = u;
    for (int l = 1; l < ell; ++l) {
        const double next = ((2.0 * l + 1.0) * (u + x * cur) - l * prev) / (l + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

void real_harmonic_column(int m, int ell_max, double theta, std::span<double> out) {
    if (m < 0 || m > ell_max)
        throw std::domain_error("real_harmonic_column: need 0 <= m <= ell_max");
    if (out.size() != static_cast<std::size_t>(ell_max - m) + 1)
        throw std::invalid_argument("real_harmonic_column: output span has wrong length");
    const double x = std::cos(theta);
    const double s = std::abs(std::sin(theta));
    constexpr int kShift = 200;
    const double up = std::ldexp(1.0, kShift);
    const double down = std::ldexp(1.0, -kShift);

    // lambda_mm as mantissa * 2^exponent
    double mant = 1.0 / std::sqrt(4.0 * kPi);
    int exponent = 0;
    for (int k = 1; k <= m; ++k) {
        mant *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;
        if (mant == 0.0) break;
        if (std::abs(mant) < down) {
            mant *= up;
            exponent -= kShift;
        }
    }
    if (mant == 0.0) {
        for (auto& v : out) v = 0.0;
        return;
    }

    double prev = 0.0;
    double cur = mant;
    out[0] = std::ldexp(cur, exponent);
    for (int l = m + 1; l <= ell_max; ++l) {
        double next;
        if (l == m + 1) {
            next = std::sqrt(2.0 * m + 3.0) * x * cur;
        } else {
            const double l2 = static_cast<double>(l) * l;
            const double m2 = static_cast<double>(m) * m;
            const double lm1 = l - 1.0;
            const double a = std::sqrt((4.0 * l2 - 1.0) / (l2 - m2));
            const double b = std::sqrt((lm1 * lm1 - m2) / (4.0 * lm1 * lm1 - 1.0));
            next = a * (x * cur - b * prev);
        }
        prev = cur;
        cur = next;
        if (exponent < 0 && std::abs(cur) > up) {
            cur *= down;
            prev *= down;
            exponent += kShift;
        }
        out[l - m] = std::ldexp(cur, exponent);
    }
}

double real_harmonic_meridian(int ell, int m, double theta) {
    check_degree(ell);
    if (m < 0 || m > ell)
        throw std::domain_error("real_harmonic_meridian: order m=" + std::to_string(m) + " outside [0, " +
                                std::to_string(ell) + "]");
    std::vector<double> column(static_cast<std::size_t>(ell - m) + 1);
    real_harmonic_column(m, ell, theta, column);
    return column.back();
}

double bessel_j(int order, double x) {
    if (order != 0 && order != 2) throw std::domain_error("bessel_j: only orders 0 and 2 are supported");
    if (!(x >= 0.0)) throw std::domain_error("bessel_j: argument must be non-negative");
    if (x < 8.0) return bessel_series(order, x);
    if (x < 25.0) return bessel_miller(order, x);
    return bessel_hankel(order, x);
}

double hilb_approx_p(int ell, double angle) {
    check_degree(ell);
    if (!(angle > 0.0 && angle < kPi)) throw std::domain_error("hilb_approx_p: angle must lie in (0, pi)");
    return std::sqrt(angle / std::sin(angle)) * bessel_j(0, (ell + 0.5) * angle);
}

GaussLegendreRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
    GaussLegendreRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const int roots = (n + 1) / 2;
    for (int i = 0; i < roots; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double deriv = 1.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = z;
            for (int l = 1; l < n; ++l) {
                const double p2 = ((2.0 * l + 1.0) * z * p1 - l * p0) / (l + 1.0);
                p0 = p1;
                p1 = p2;
            }
            deriv = n * (z * p1 - p0) / (z * z - 1.0);
            const double step = p1 / deriv;
            z -= step;
            if (std::abs(step) < 1e-16) break;
        }
        // recompute derivative at converged root
        double p0 = 1.0, p1 = z;
        for (int l = 1; l < n; ++l) {
            const double p2 = ((2.0 * l + 1.0) * z * p1 - l * p0) / (l + 1.0);
            p0 = p1;
            p1 = p2;
        }
        deriv = n == 1 ? 1.0 : n * (z * p1 - p0) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * deriv * deriv);
        rule.nodes[static_cast<std::size_t>(i)] = mid - half * z;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = mid + half * z;
        rule.weights[static_cast<std::size_t>(i)] = half * w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = half * w;
    }
    return rule;
}

}  // namespace sphereqv::specfun

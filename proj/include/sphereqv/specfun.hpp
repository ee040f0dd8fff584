#pragma once

// Special functions used by the spherical quadratic-variation code: Legendre
// polynomials and their derivatives, fully normalized associated Legendre
// functions restricted to a meridian, Bessel J0/J2, the small-angle Bessel
// approximation of P_l(cos theta), and Gauss-Legendre rules.
//
// Everything here is a pure function of its arguments.

#include <span>
#include <vector>

namespace sphereqv::specfun {

inline constexpr double kPi = 3.14159265358979323846;

/// P_l(x) by the upward three-term recurrence. Throws std::domain_error for |x| > 1.
double legendre_p(int ell, double x);

/// P'_l(x). Uses P'_{l+1} = P'_{l-1} + (2l+1) P_l, which stays finite at x = +-1.
double legendre_p_deriv(int ell, double x);

/// Writes P_0(x) .. P_{ell_max}(x) into out (out.size() must be ell_max + 1).
void legendre_p_sequence(int ell_max, double x, std::span<double> out);

/// 1 - P_l(cos theta) without the cancellation of forming P_l first.
///
/// The recurrence runs on D_l = 1 - P_l with 1 - cos(theta) = 2 sin^2(theta/2),
/// so small angles keep full relative precision (this is the quantity that
/// sets the expected quadratic variation).
double legendre_one_minus_p_cos(int ell, double theta);

/// Fully normalized real harmonic on the meridian phi = 0:
///   lambda_{lm}(theta) = N_lm P_l^m(cos theta),  N_lm^2 = (2l+1)(l-m)! / (4 pi (l+m)!).
/// No Condon-Shortley phase. Throws std::domain_error unless 0 <= m <= ell.
double real_harmonic_meridian(int ell, int m, double theta);

/// lambda_{lm}(theta) for l = m .. ell_max at fixed m, written to out[l - m].
/// Extended-exponent bookkeeping keeps sin^m(theta) from underflowing early.
void real_harmonic_column(int m, int ell_max, double theta, std::span<double> out);

/// Bessel function of the first kind, order 0 or 2, for x >= 0.
///
/// Power series below x = 8, Miller backward recurrence on [8, 25) and the
/// Hankel asymptotic expansion from 25 on. Absolute error stays near 1e-15.
double bessel_j(int order, double x);

/// Leading small-angle (Hilb) term sqrt(a / sin a) * J0((l + 1/2) a).
/// Throws std::domain_error unless 0 < angle < pi.
double hilb_approx_p(int ell, double angle);

struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped to [a, b].
GaussLegendreRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

}  // namespace sphereqv::specfun

#include "sphereqv/covariance.hpp"

#include "sphereqv/specfun.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sphereqv {

using specfun::kPi;

namespace {

// sum_{k >= 0} (a + k)^(-s) for s > 1, a >= 1: direct head plus Euler-Maclaurin tail.
double hurwitz_zeta(double s, double a) {
    constexpr int kHead = 16;
    double sum = 0.0;
    for (int k = 0; k < kHead; ++k) sum += std::pow(a + k, -s);
    const double b = a + kHead;
    const double bs = std::pow(b, -s);
    sum += b * bs / (s - 1.0) + 0.5 * bs + s * bs / (12.0 * b) -
           s * (s + 1.0) * (s + 2.0) * bs / (720.0 * b * b * b) +
           s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * bs / (30240.0 * b * b * b * b * b);
    return sum;
}

double degree_weight(int ell) { return (2.0 * ell + 1.0) / (4.0 * kPi); }

// D_l(theta) = 1 - P_l(cos theta) for l = 0..ell_max.
std::vector<double> one_minus_p_sequence(int ell_max, double theta) {
    std::vector<double> d(static_cast<std::size_t>(ell_max) + 1, 0.0);
    if (ell_max == 0) return d;
    const double s = std::sin(0.5 * theta);
    const double u = 2.0 * s * s;
    const double x = std::cos(theta);
    d[1] = u;
    for (int l = 1; l < ell_max; ++l)
        d[l + 1] = ((2.0 * l + 1.0) * (u + x * d[l]) - l * d[l - 1]) / (l + 1.0);
    return d;
}

// Increment lags from kernel values K(k h), k = 0..N, and an accurately
// computed lag0 = 2 (K(0) - K(h)).
std::vector<double> lags_from_kernel(const std::vector<double>& kernel, double lag0) {
    const std::size_t n = kernel.size() - 1;
    std::vector<double> lags(n);
    lags[0] = lag0;
    for (std::size_t k = 1; k < n; ++k) lags[k] = 2.0 * kernel[k] - kernel[k - 1] - kernel[k + 1];
    return lags;
}

// sum_{l=l_lo}^{l_hi} weights[l] P_l(cos(k h)) for k = 0..N.
std::vector<double> summed_kernel(const std::vector<double>& weights, int n) {
    const int l_hi = static_cast<int>(weights.size()) - 1;
    const double h = kPi / (2.0 * n);
    std::vector<double> kernel(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 0; k <= n; ++k) {
        const double x = std::cos(k * h);
        double prev = 1.0;
        double cur = x;
        double acc = weights[0];
        if (l_hi >= 1) acc += weights[1] * x;
        for (int l = 1; l < l_hi; ++l) {
            const double next = ((2.0 * l + 1.0) * x * cur - l * prev) / (l + 1.0);
            prev = cur;
            cur = next;
            acc += weights[static_cast<std::size_t>(l + 1)] * cur;
        }
        kernel[static_cast<std::size_t>(k)] = acc;
    }
    return kernel;
}

}  // namespace

PowerSpectrum PowerSpectrum::from_values(std::vector<double> values) {
    if (values.size() < 2) throw std::invalid_argument("explicit spectrum needs values for l = 0 .. l_max with l_max >= 1");
    for (double v : values)
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("spectrum values must be finite and non-negative");
    PowerSpectrum out;
    out.kind_ = Kind::explicit_values;
    out.l_max_ = static_cast<int>(values.size()) - 1;
    out.values_ = std::move(values);
    return out;
}

PowerSpectrum PowerSpectrum::power_law(double amplitude, double epsilon, int l_max) {
    if (!(amplitude > 0.0)) throw std::invalid_argument("power-law amplitude must be positive");
    if (!(epsilon > 0.0)) throw std::invalid_argument("power-law epsilon must be positive");
    if (l_max < 1) throw std::invalid_argument("l_max must be at least 1");
    PowerSpectrum out;
    out.kind_ = Kind::power_law;
    out.amplitude_ = amplitude;
    out.epsilon_ = epsilon;
    out.l_max_ = l_max;
    return out;
}

PowerSpectrum PowerSpectrum::with_l_max(int l_max) const {
    if (kind_ != Kind::power_law) throw std::logic_error("with_l_max applies to power-law spectra only");
    return power_law(amplitude_, epsilon_, l_max);
}

double PowerSpectrum::coefficient(int ell) const {
    if (ell < 0 || ell > l_max_) return 0.0;
    if (kind_ == Kind::explicit_values) return values_[static_cast<std::size_t>(ell)];
    if (ell == 0) return 0.0;
    return amplitude_ * std::pow(static_cast<double>(ell), -2.0 - epsilon_);
}

double PowerSpectrum::pointwise_variance() const {
    double sum = 0.0;
    for (int l = 1; l <= l_max_; ++l) sum += coefficient(l) * degree_weight(l);
    return sum;
}

double PowerSpectrum::tail_variance() const {
    if (kind_ == Kind::explicit_values) return 0.0;
    const double a = l_max_ + 1.0;
    // C_l (2l+1) = c0 (2 l^{-1-eps} + l^{-2-eps})
    return amplitude_ / (4.0 * kPi) * (2.0 * hurwitz_zeta(1.0 + epsilon_, a) + hurwitz_zeta(2.0 + epsilon_, a));
}

DefaultTruncation default_l_max(double amplitude, double epsilon, int n, double rel_tol, int cap) {
    if (n < 1) throw std::invalid_argument("default_l_max: n must be positive");
    const double h = kPi / (2.0 * n);
    const auto d = one_minus_p_sequence(cap, h);
    double diag = 0.0;
    int next_check = 64;
    for (int l = 1; l <= cap; ++l) {
        diag += amplitude * std::pow(static_cast<double>(l), -2.0 - epsilon) * degree_weight(l) * 2.0 * d[static_cast<std::size_t>(l)];
        if (l == next_check || l == cap) {
            const double bound = PowerSpectrum::power_law(amplitude, epsilon, l).truncation_tail_bound();
            if (bound <= rel_tol * diag) return {l, false};
            next_check *= 2;
        }
    }
    return {cap, true};
}

LineGrid::LineGrid(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("LineGrid: number of increments must be positive");
}

double LineGrid::spacing() const { return kPi / (2.0 * n_); }

double LineGrid::theta(int i) const {
    if (i < 1 || i > n_ + 1) throw std::out_of_range("LineGrid::theta: index " + std::to_string(i) + " outside [1, N+1]");
    return static_cast<double>(i) / n_ * (kPi / 2.0);
}

std::vector<double> LineGrid::points() const {
    std::vector<double> out(static_cast<std::size_t>(n_) + 1);
    for (int i = 1; i <= n_ + 1; ++i) out[static_cast<std::size_t>(i - 1)] = theta(i);
    return out;
}

IncrementGram IncrementGram::from_lags(std::span<const double> lags) {
    IncrementGram g;
    g.n = static_cast<int>(lags.size());
    g.sigma.resize(g.n, g.n);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) g.sigma(i, j) = lags[static_cast<std::size_t>(std::abs(i - j))];
    return g;
}

void FbmSpec::validate() const {
    if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("Hurst index must lie in (0, 1)");
    if (!(t > 0.0 && s > 0.0)) throw std::invalid_argument("fBm observation times must be positive");
    if (t == s) throw std::invalid_argument("fBm observation times must be distinct");
}

double kernel_fl(int ell, double c_ell, double theta1, double theta2) {
    if (ell < 0) throw std::invalid_argument("kernel_fl: degree must be non-negative");
    if (!(c_ell >= 0.0)) throw std::invalid_argument("kernel_fl: C_l must be non-negative");
    return c_ell * degree_weight(ell) * specfun::legendre_p(ell, std::cos(std::abs(theta1 - theta2)));
}

double kernel_f(const PowerSpectrum& spectrum, double theta1, double theta2) {
    const double x = std::cos(std::abs(theta1 - theta2));
    std::vector<double> p(static_cast<std::size_t>(spectrum.l_max()) + 1);
    specfun::legendre_p_sequence(spectrum.l_max(), x, p);
    double sum = 0.0;
    for (int l = 1; l <= spectrum.l_max(); ++l) sum += spectrum.coefficient(l) * degree_weight(l) * p[static_cast<std::size_t>(l)];
    return sum;
}

double fbm_spatial_kernel(const PowerSpectrum& spectrum, double theta1, double theta2) {
    const double x = std::cos(std::abs(theta1 - theta2));
    std::vector<double> p(static_cast<std::size_t>(spectrum.l_max()) + 1);
    specfun::legendre_p_sequence(spectrum.l_max(), x, p);
    double sum = 0.0;
    for (int l = 0; l <= spectrum.l_max(); ++l) sum += spectrum.coefficient(l) * (2.0 * l + 1.0) * p[static_cast<std::size_t>(l)];
    return sum;
}

double second_difference_p(int ell, int k, int n) {
    if (n < 2 || k < 1 || k > n - 1)
        throw std::out_of_range("second_difference_p: need 1 <= k <= N-1, got k=" + std::to_string(k) + ", N=" + std::to_string(n));
    const double h = kPi / (2.0 * n);
    return 2.0 * specfun::legendre_p(ell, std::cos(k * h)) - specfun::legendre_p(ell, std::cos((k - 1) * h)) -
           specfun::legendre_p(ell, std::cos((k + 1) * h));
}

IncrementGram increment_gram_fl(int ell, double c_ell, const LineGrid& grid) {
    if (ell < 0) throw std::domain_error("increment_gram_fl: negative degree");
    const int n = grid.n();
    const double h = grid.spacing();
    const double scale = c_ell * degree_weight(ell);
    std::vector<double> kernel(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) kernel[static_cast<std::size_t>(k)] = scale * specfun::legendre_p(ell, std::cos(k * h));
    const double lag0 = 2.0 * scale * specfun::legendre_one_minus_p_cos(ell, h);
    const auto lags = lags_from_kernel(kernel, lag0);
    return IncrementGram::from_lags(lags);
}

FieldGram increment_gram_f(const PowerSpectrum& spectrum, const LineGrid& grid, TailClosure closure) {
    const int n = grid.n();
    const int l_max = spectrum.l_max();
    std::vector<double> weights(static_cast<std::size_t>(l_max) + 1, 0.0);
    for (int l = 1; l <= l_max; ++l) weights[static_cast<std::size_t>(l)] = spectrum.coefficient(l) * degree_weight(l);
    const auto kernel = summed_kernel(weights, n);
    const auto d = one_minus_p_sequence(l_max, grid.spacing());
    double lag0 = 0.0;
    for (int l = 1; l <= l_max; ++l) lag0 += 2.0 * weights[static_cast<std::size_t>(l)] * d[static_cast<std::size_t>(l)];
    auto lags = lags_from_kernel(kernel, lag0);
    if (closure == TailClosure::white_noise) {
        const double tail = spectrum.tail_variance();
        lags[0] += 2.0 * tail;
        if (n > 1) lags[1] -= tail;
    }
    return {IncrementGram::from_lags(lags), spectrum.truncation_tail_bound()};
}

double fbm_time_covariance(double hurst, double t, double s) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("Hurst index must lie in (0, 1)");
    if (!(t >= 0.0 && s >= 0.0)) throw std::invalid_argument("fBm times must be non-negative");
    const double two_h = 2.0 * hurst;
    return 0.5 * (std::pow(t, two_h) + std::pow(s, two_h) - std::pow(std::abs(t - s), two_h));
}

Eigen::MatrixXd fbm_joint_gram(const FbmSpec& spec, const LineGrid& grid) {
    spec.validate();
    const int n = grid.n();
    const int l_max = spec.spectrum.l_max();
    // A_l (2l+1) P_l = 4 pi * [A_l (2l+1)/(4 pi)] P_l; the l = 0 term is constant and drops out of increments.
    std::vector<double> weights(static_cast<std::size_t>(l_max) + 1, 0.0);
    for (int l = 1; l <= l_max; ++l) weights[static_cast<std::size_t>(l)] = spec.spectrum.coefficient(l) * (2.0 * l + 1.0);
    const auto kernel = summed_kernel(weights, n);
    const auto d = one_minus_p_sequence(l_max, grid.spacing());
    double lag0 = 0.0;
    for (int l = 1; l <= l_max; ++l) lag0 += 2.0 * weights[static_cast<std::size_t>(l)] * d[static_cast<std::size_t>(l)];
    const auto spatial = IncrementGram::from_lags(lags_from_kernel(kernel, lag0)).sigma;

    const double rtt = fbm_time_covariance(spec.hurst, spec.t, spec.t);
    const double rts = fbm_time_covariance(spec.hurst, spec.t, spec.s);
    const double rss = fbm_time_covariance(spec.hurst, spec.s, spec.s);
    Eigen::MatrixXd joint(2 * n, 2 * n);
    joint.topLeftCorner(n, n) = rtt * spatial;
    joint.topRightCorner(n, n) = rts * spatial;
    joint.bottomLeftCorner(n, n) = rts * spatial;
    joint.bottomRightCorner(n, n) = rss * spatial;
    return joint;
}

}  // namespace sphereqv

#include "sphereqv/statistics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sphereqv {

namespace {

// Shifted power sums sum d^q, q = 0 .. 4, d = x - shift.
using PowerSums = std::array<double, 5>;

PowerSums power_sums(std::span<const double> x, double shift) {
    std::vector<double> d1(x.size()), d2(x.size()), d3(x.size()), d4(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - shift;
        d1[i] = d;
        d2[i] = d * d;
        d3[i] = d2[i] * d;
        d4[i] = d2[i] * d2[i];
    }
    return {static_cast<double>(x.size()), pairwise_sum(d1), pairwise_sum(d2), pairwise_sum(d3), pairwise_sum(d4)};
}

// k-statistics from shifted power sums.
std::array<double, 5> k_statistics(const PowerSums& s) {
    const double n = s[0];
    const double m = s[1] / n;  // mean of d
    // central sums
    const double c2 = s[2] - n * m * m;
    const double c3 = s[3] - 3.0 * m * s[2] + 3.0 * m * m * s[1] - n * m * m * m;
    const double c4 = s[4] - 4.0 * m * s[3] + 6.0 * m * m * s[2] - 4.0 * m * m * m * s[1] + n * m * m * m * m;
    std::array<double, 5> k{};
    k[1] = m;
    k[2] = c2 / (n - 1.0);
    k[3] = n * c3 / ((n - 1.0) * (n - 2.0));
    k[4] = (n * (n + 1.0) * c4 - 3.0 * (n - 1.0) * c2 * c2) / ((n - 1.0) * (n - 2.0) * (n - 3.0));
    return k;
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 16) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

CumulantEstimate empirical_cumulants(std::span<const double> samples, int p_max, int batches) {
    if (p_max < 2 || p_max > 4) throw std::invalid_argument("empirical_cumulants: p_max must lie in [2, 4]");
    if (samples.size() < static_cast<std::size_t>(10 * p_max))
        throw std::invalid_argument("empirical_cumulants: need at least " + std::to_string(10 * p_max) + " samples, got " +
                                    std::to_string(samples.size()));
    const double shift = pairwise_sum(samples) / static_cast<double>(samples.size());
    const PowerSums total = power_sums(samples, shift);
    const auto full = k_statistics(total);

    const std::size_t b_count = std::min<std::size_t>(static_cast<std::size_t>(std::max(batches, 2)), samples.size());
    std::vector<PowerSums> parts(b_count);
    for (std::size_t b = 0; b < b_count; ++b) {
        const std::size_t lo = b * samples.size() / b_count;
        const std::size_t hi = (b + 1) * samples.size() / b_count;
        parts[b] = power_sums(samples.subspan(lo, hi - lo), shift);
    }
    std::vector<std::array<double, 5>> loo(b_count);
    for (std::size_t b = 0; b < b_count; ++b) {
        PowerSums rest{};
        for (int q = 0; q < 5; ++q) rest[static_cast<std::size_t>(q)] = total[static_cast<std::size_t>(q)] - parts[b][static_cast<std::size_t>(q)];
        loo[b] = k_statistics(rest);
    }

    CumulantEstimate out;
    out.k.assign(static_cast<std::size_t>(p_max) + 1, 0.0);
    out.se.assign(static_cast<std::size_t>(p_max) + 1, 0.0);
    const double bc = static_cast<double>(b_count);
    for (int p = 1; p <= p_max; ++p) {
        const auto pi = static_cast<std::size_t>(p);
        double mean = 0.0;
        for (const auto& v : loo) mean += v[pi];
        mean /= bc;
        double ss = 0.0;
        for (const auto& v : loo) ss += (v[pi] - mean) * (v[pi] - mean);
        out.k[pi] = p == 1 ? full[pi] + shift : full[pi];
        out.se[pi] = std::sqrt((bc - 1.0) / bc * ss);
    }
    return out;
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_normal(std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("ks_normal: empty sample");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = standard_normal_cdf(x[i]);
        d = std::max({d, (i + 1.0) / n - f, f - i / n});
    }
    return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / x.size() - static_cast<double>(j) / y.size()));
    }
    return d;
}

double ks_two_sample_critical(std::size_t n1, std::size_t n2, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ks_two_sample_critical: alpha must lie in (0, 1)");
    const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
    return c * std::sqrt((static_cast<double>(n1) + n2) / (static_cast<double>(n1) * n2));
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

SlopeFit loglog_slope(std::span<const double> xs, std::span<const double> ys, LogCorrection correction) {
    if (xs.size() != ys.size()) throw std::invalid_argument("loglog_slope: xs and ys differ in length");
    if (xs.size() < 3) throw std::invalid_argument("loglog_slope: need at least 3 points");
    std::vector<double> lx(xs.size()), ly(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw std::invalid_argument("loglog_slope: data must be positive");
        lx[i] = std::log(xs[i]);
        double y = ys[i];
        if (correction == LogCorrection::divide_by_log) {
            if (!(xs[i] > 1.0)) throw std::invalid_argument("loglog_slope: divide_by_log needs x > 1");
            y /= lx[i];
        }
        ly[i] = std::log(y);
    }
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("loglog_slope: xs must not all be equal");
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - fit.intercept - fit.slope * lx[i];
        ssr += r * r;
    }
    fit.std_error = n > 2.0 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
    return fit;
}

}  // namespace sphereqv

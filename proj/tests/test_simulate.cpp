#include "sphereqv/harness.hpp"
#include "sphereqv/moments.hpp"
#include "sphereqv/simulate.hpp"
#include "sphereqv/specfun.hpp"
#include "sphereqv/statistics.hpp"

#include <doctest.h>

#include <cmath>

using namespace sphereqv;
using specfun::kPi;

namespace {

// Entrywise check of the empirical increment covariance against Sigma, each
// entry within z standard errors estimated from the products themselves.
int covariance_violations(const std::vector<std::vector<double>>& increments, const Eigen::MatrixXd& sigma, double z) {
    const int n = static_cast<int>(sigma.rows());
    const double reps = static_cast<double>(increments.size());
    int bad = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double s = 0.0, s2 = 0.0;
            for (const auto& d : increments) {
                const double p = d[static_cast<std::size_t>(i)] * d[static_cast<std::size_t>(j)];
                s += p;
                s2 += p * p;
            }
            const double mean = s / reps;
            const double se = std::sqrt((s2 / reps - mean * mean) / reps);
            bad += std::abs(mean - sigma(i, j)) > z * se;
        }
    return bad;
}

std::vector<double> increments(const PathSample& p) {
    std::vector<double> d(p.values.size() - 1);
    for (std::size_t i = 0; i + 1 < p.values.size(); ++i) d[i] = p.values[i + 1] - p.values[i];
    return d;
}

}  // namespace

TEST_CASE("coefficient draws") {
    RngStream rng(1, 2, 3);
    const auto c = sample_fl_coefficients(4, 2.0, rng);
    CHECK(c.size() == 9);
    RngStream zero(1, 2, 3);
    for (double v : sample_fl_coefficients(4, 0.0, zero)) CHECK(v == 0.0);
    CHECK_THROWS_AS(sample_fl_coefficients(4, -1.0, rng), std::invalid_argument);
}

TEST_CASE("zero spectrum gives a zero path") {
    const auto s = LineSampler::single_ell(3, 0.0, LineGrid(8));
    for (double v : s.sample(9, 0).values) CHECK(v == 0.0);
}

TEST_CASE("two-point covariance at l = 1") {
    const LineGrid grid(4);
    const auto sampler = LineSampler::single_ell(1, 1.0, grid);
    const int reps = 100000;
    double sxy = 0.0, sxy2 = 0.0, sxx = 0.0, sxx2 = 0.0;
    for (int r = 0; r < reps; ++r) {
        const auto p = sampler.sample(77, static_cast<std::uint64_t>(r));
        const double xy = p.values[0] * p.values[2], xx = p.values[1] * p.values[1];
        sxy += xy;
        sxy2 += xy * xy;
        sxx += xx;
        sxx2 += xx * xx;
    }
    const double mxy = sxy / reps, mxx = sxx / reps;
    CHECK(std::abs(mxy - kernel_fl(1, 1.0, grid.theta(1), grid.theta(3))) <= 4.0 * std::sqrt((sxy2 / reps - mxy * mxy) / reps));
    CHECK(std::abs(mxx - 3.0 / (4.0 * kPi)) <= 4.0 * std::sqrt((sxx2 / reps - mxx * mxx) / reps));
}

TEST_CASE("harmonic route reproduces the increment Gram") {
    for (auto [l, n] : {std::pair{3, 8}, std::pair{20, 32}}) {
        const LineGrid grid(n);
        const auto sampler = LineSampler::single_ell(l, 1.0, grid);
        std::vector<std::vector<double>> d;
        for (int r = 0; r < 100000; ++r) d.push_back(increments(sampler.sample(5, static_cast<std::uint64_t>(r))));
        CAPTURE(l);
        CHECK(covariance_violations(d, increment_gram_fl(l, 1.0, grid).sigma, 5.0) == 0);
    }
}

TEST_CASE("circle route reproduces the increment Gram") {
    const LineGrid grid(16);
    const auto spec = PowerSpectrum::power_law(1.0, 0.2, 200);
    const auto sampler = LineSampler::full_field(spec, grid, SamplingRoute::circle);
    std::vector<std::vector<double>> d;
    for (int r = 0; r < 100000; ++r) d.push_back(increments(sampler.sample(6, static_cast<std::uint64_t>(r))));
    CHECK(covariance_violations(d, increment_gram_f(spec, grid).gram.sigma, 5.0) == 0);
}

TEST_CASE("folded circle weights reproduce the kernel on the grid") {
    const int n = 24;
    const auto spec = PowerSpectrum::power_law(1.0, 0.3, 150);
    std::vector<double> w(151, 0.0);
    for (int l = 1; l <= 150; ++l) w[static_cast<std::size_t>(l)] = spec.coefficient(l) * (2.0 * l + 1.0) / (4.0 * kPi);
    const auto folded = folded_circle_weights(w, n);
    REQUIRE(folded.size() == static_cast<std::size_t>(2 * n + 1));
    for (double v : folded) CHECK(v >= 0.0);
    const double h = kPi / (2.0 * n);
    for (int k = 0; k <= n; ++k) {
        double lhs = 0.0;
        for (int r = 0; r <= 2 * n; ++r) lhs += folded[static_cast<std::size_t>(r)] * std::cos(r * k * h);
        CHECK(lhs == doctest::Approx(kernel_f(spec, 0.0, k * h)).epsilon(1e-11).scale(1.0));
    }
}

TEST_CASE("routes agree in law on V_N") {
    const LineGrid grid(32);
    const auto spec = PowerSpectrum::power_law(1.0, 0.2, 64);
    const auto exact = increment_gram_f(spec, grid).gram;
    for (auto route : {SamplingRoute::harmonic, SamplingRoute::circle}) {
        const auto sampler = LineSampler::full_field(spec, grid, route);
        std::vector<double> v;
        for (int r = 0; r < 20000; ++r) v.push_back(quadratic_variation(sampler.sample(8, static_cast<std::uint64_t>(r))));
        const auto est = empirical_cumulants(v, 2);
        CHECK(std::abs(est.k[1] - exact.sigma.trace()) <= 4.0 * est.se[1]);
        CHECK(std::abs(est.k[2] - exact_var_vnl(exact)) <= 4.0 * est.se[2]);
    }
}

TEST_CASE("harmonic full field is the sum of per-degree draws") {
    const LineGrid grid(10);
    const auto spec = PowerSpectrum::from_values({0.0, 1.0, 0.5, 0.25});
    const auto f = sample_f_line(spec, grid, 42, 3, SamplingRoute::harmonic);
    std::vector<double> sum(11, 0.0);
    for (int l = 1; l <= 3; ++l) {
        RngStream rng(42, 3, static_cast<std::uint64_t>(l));
        const auto p = sample_fl_line(l, spec.coefficient(l), grid, rng);
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += p.values[i];
    }
    for (std::size_t i = 0; i < sum.size(); ++i) CHECK(f.values[i] == doctest::Approx(sum[i]).epsilon(1e-14));
}

TEST_CASE("sampling is deterministic per stream") {
    const auto s = LineSampler::full_field(PowerSpectrum::power_law(1.0, 0.2, 300), LineGrid(64));
    CHECK(s.sample(1, 7).values == s.sample(1, 7).values);
    CHECK(s.sample(1, 7).values != s.sample(1, 8).values);
    CHECK(s.stream_id(1, 7) == derive_stream_id(1, 7, kCircleChannel));

    SampleSpec spec;
    spec.target = TargetKind::single_ell;
    spec.ell = 5;
    spec.n = 32;
    spec.seed = 99;
    spec.replications = 500;
    const auto one = simulate_replications(spec, {1, nullptr});
    const auto four = simulate_replications(spec, {4, nullptr});
    CHECK(one.v == four.v);
    CHECK(one.stream_ids == four.stream_ids);
}

TEST_CASE("quadratic variation") {
    CHECK(quadratic_variation(std::vector<double>{0.0, 1.0, 3.0}) == 5.0);
    CHECK(quadratic_variation(std::vector<double>{2.0, 2.0}) == 0.0);
    CHECK_THROWS_AS(quadratic_variation(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("fbm sampling") {
    FbmSpec spec;
    spec.spectrum = PowerSpectrum::from_values({1.0, 0.5, 0.25, 0.125});
    const LineGrid grid(16);

    SUBCASE("marginal scaling and routes") {
        spec.hurst = 0.7;
        spec.t = 2.0;
        spec.s = 1.0;
        const auto joint = fbm_joint_gram(spec, grid);
        const double mean_t = joint.topLeftCorner(16, 16).trace();
        const double mean_s = joint.bottomRightCorner(16, 16).trace();
        CHECK(mean_t / mean_s == doctest::Approx(std::pow(2.0, 1.4)));
        for (auto route : {SamplingRoute::harmonic, SamplingRoute::circle}) {
            const FbmSampler sampler(spec, grid, route);
            std::vector<double> vt, vs;
            for (int r = 0; r < 20000; ++r) {
                const auto p = sampler.sample(4, static_cast<std::uint64_t>(r));
                vt.push_back(quadratic_variation(p.at_t));
                vs.push_back(quadratic_variation(p.at_s));
            }
            const auto et = empirical_cumulants(vt, 2), es = empirical_cumulants(vs, 2);
            CHECK(std::abs(et.k[1] - mean_t) <= 4.0 * et.se[1]);
            CHECK(std::abs(es.k[1] - mean_s) <= 4.0 * es.se[1]);
        }
    }

    SUBCASE("independent increments in time at H = 1/2") {
        spec.hurst = 0.5;
        spec.t = 3.0;
        spec.s = 1.0;
        const FbmSampler sampler(spec, grid, SamplingRoute::circle);
        const int reps = 20000;
        double sxy = 0.0, sx2 = 0.0, sy2 = 0.0;
        for (int r = 0; r < reps; ++r) {
            const auto p = sampler.sample(12, static_cast<std::uint64_t>(r));
            const double x = p.at_t.values[5] - p.at_s.values[5], y = p.at_s.values[5];
            sxy += x * y;
            sx2 += x * x;
            sy2 += y * y;
        }
        const double corr = sxy / std::sqrt(sx2 * sy2);
        CHECK(std::abs(corr) <= 4.0 / std::sqrt(static_cast<double>(reps)));
    }

    SUBCASE("self-similarity in law") {
        spec.hurst = 0.3;
        spec.t = 2.0;
        spec.s = 1.0;
        const FbmSampler sampler(spec, grid, SamplingRoute::circle);
        std::vector<double> scaled_t, scaled_s;
        for (int r = 0; r < 1000; ++r) {
            scaled_t.push_back(quadratic_variation(sampler.sample(21, static_cast<std::uint64_t>(r)).at_t) / std::pow(2.0, 0.6));
            scaled_s.push_back(quadratic_variation(sampler.sample(22, static_cast<std::uint64_t>(r)).at_s));
        }
        CHECK(ks_two_sample(scaled_t, scaled_s) <= ks_two_sample_critical(1000, 1000, 0.01));
    }
}

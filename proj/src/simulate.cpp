#include "sphereqv/simulate.hpp"

#include "sphereqv/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sphereqv {

using specfun::kPi;

namespace {

constexpr double kMaxTableEntries = 5e7;

std::vector<HarmonicTable> build_tables(const std::vector<int>& degrees, const LineGrid& grid) {
    std::vector<HarmonicTable> tables;
    tables.reserve(degrees.size());
    for (int l : degrees) tables.emplace_back(l, grid);
    return tables;
}

void check_table_budget(double entries) {
    if (entries > kMaxTableEntries)
        throw std::invalid_argument("harmonic route would need " + std::to_string(static_cast<long long>(entries)) +
                                    " table entries; use the circle route");
}

struct TrigTables {
    std::vector<double> cos_t;
    std::vector<double> sin_t;
};

TrigTables trig_tables(int n) {
    const int period = 4 * n;
    TrigTables t;
    t.cos_t.resize(static_cast<std::size_t>(period));
    t.sin_t.resize(static_cast<std::size_t>(period));
    for (int k = 0; k < period; ++k) {
        const double a = 2.0 * kPi * k / period;
        t.cos_t[static_cast<std::size_t>(k)] = std::cos(a);
        t.sin_t[static_cast<std::size_t>(k)] = std::sin(a);
    }
    return t;
}

std::vector<double> sqrt_all(std::vector<double> w) {
    for (auto& v : w) v = std::sqrt(std::max(v, 0.0));
    return w;
}

// Adds amplitude * (x cos(r theta_i) + y sin(r theta_i)) to out.
void add_channel(std::vector<double>& out, int r, double x, double y, const std::vector<double>& cos_t,
                 const std::vector<double>& sin_t) {
    const std::size_t period = cos_t.size();
    std::size_t idx = static_cast<std::size_t>(r) % period;  // r * i mod 4N, starting at i = 1
    const std::size_t step = idx;
    for (auto& v : out) {
        v += x * cos_t[idx] + y * sin_t[idx];
        idx += step;
        if (idx >= period) idx -= period;
    }
}

}  // namespace

std::vector<double> sample_fl_coefficients(int ell, double c_ell, RngStream& rng) {
    if (ell < 0) throw std::domain_error("sample_fl_coefficients: negative degree");
    if (!(c_ell >= 0.0)) throw std::invalid_argument("sample_fl_coefficients: C_l must be non-negative");
    const double sd = std::sqrt(c_ell);
    std::vector<double> coeffs(static_cast<std::size_t>(2 * ell + 1));
    for (auto& a : coeffs) a = sd * rng.normal();
    return coeffs;
}

HarmonicTable::HarmonicTable(int ell, const LineGrid& grid) : ell_(ell), points_(grid.point_count()) {
    if (ell < 0) throw std::domain_error("HarmonicTable: negative degree");
    check_table_budget(static_cast<double>(ell + 1) * points_);
    values_.assign(static_cast<std::size_t>(ell + 1) * points_, 0.0);
    std::vector<double> column;
    for (int i = 0; i < points_; ++i) {
        const double theta = grid.theta(i + 1);
        for (int m = 0; m <= ell; ++m) {
            column.resize(static_cast<std::size_t>(ell - m) + 1);
            specfun::real_harmonic_column(m, ell, theta, column);
            values_[static_cast<std::size_t>(m) * points_ + i] = column.back();
        }
    }
}

PathSample HarmonicTable::synthesize(const std::vector<double>& coeffs, double scale) const {
    if (coeffs.size() != static_cast<std::size_t>(2 * ell_ + 1))
        throw std::invalid_argument("HarmonicTable::synthesize: expected 2l+1 coefficients");
    PathSample path;
    path.values.assign(static_cast<std::size_t>(points_), 0.0);
    const double root2 = std::sqrt(2.0);
    for (int m = 0; m <= ell_; ++m) {
        // sine harmonics vanish on the meridian phi = 0
        const double a = m == 0 ? coeffs[0] : root2 * coeffs[static_cast<std::size_t>(2 * m - 1)];
        if (a == 0.0) continue;
        const double* row = &values_[static_cast<std::size_t>(m) * points_];
        for (int i = 0; i < points_; ++i) path.values[static_cast<std::size_t>(i)] += scale * a * row[i];
    }
    return path;
}

PathSample sample_fl_line(int ell, double c_ell, const LineGrid& grid, RngStream& rng) {
    const HarmonicTable table(ell, grid);
    return table.synthesize(sample_fl_coefficients(ell, c_ell, rng));
}

std::vector<double> folded_circle_weights(const std::vector<double>& spatial_weights, int n) {
    if (n < 1) throw std::invalid_argument("folded_circle_weights: N must be positive");
    const int l_max = static_cast<int>(spatial_weights.size()) - 1;
    const long period = 4L * n;
    std::vector<double> a(static_cast<std::size_t>(std::max(l_max, 0)) + 1);
    a[0] = 1.0;
    for (int k = 1; k <= l_max; ++k) a[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k - 1)] * (2.0 * k - 1.0) / (2.0 * k);
    std::vector<double> folded(static_cast<std::size_t>(2 * n) + 1, 0.0);
    for (int l = 0; l <= l_max; ++l) {
        const double w = spatial_weights[static_cast<std::size_t>(l)];
        if (w == 0.0) continue;
        // frequency j = l - 2k for k < l/2 carries 2 a_k a_{l-k}; j = 0 carries a_{l/2}^2
        for (int k = 0; 2 * k <= l; ++k) {
            const int j = l - 2 * k;
            const double beta = (j == 0 ? 1.0 : 2.0) * a[static_cast<std::size_t>(k)] * a[static_cast<std::size_t>(l - k)];
            long r = j % period;
            if (r > 2L * n) r = period - r;
            folded[static_cast<std::size_t>(r)] += w * beta;
        }
    }
    return folded;
}

LineSampler LineSampler::single_ell(int ell, double c_ell, const LineGrid& grid, SamplingRoute route) {
    if (ell < 1) throw std::domain_error("single-degree sampling needs l >= 1");
    if (!(c_ell >= 0.0)) throw std::invalid_argument("C_l must be non-negative");
    if (route == SamplingRoute::automatic) route = SamplingRoute::harmonic;
    LineSampler s(grid, route);
    s.degrees_ = {ell};
    s.coefficients_ = {c_ell};
    if (route == SamplingRoute::harmonic) {
        s.tables_ = build_tables(s.degrees_, grid);
    } else {
        std::vector<double> weights(static_cast<std::size_t>(ell) + 1, 0.0);
        weights[static_cast<std::size_t>(ell)] = c_ell * (2.0 * ell + 1.0) / (4.0 * kPi);
        s.circle_sd_ = sqrt_all(folded_circle_weights(weights, grid.n()));
        auto trig = trig_tables(grid.n());
        s.cos_table_ = std::move(trig.cos_t);
        s.sin_table_ = std::move(trig.sin_t);
    }
    return s;
}

LineSampler LineSampler::full_field(const PowerSpectrum& spectrum, const LineGrid& grid, SamplingRoute route) {
    if (route == SamplingRoute::automatic) route = SamplingRoute::circle;
    LineSampler s(grid, route);
    const int l_max = spectrum.l_max();
    if (route == SamplingRoute::harmonic) {
        double entries = 0.0;
        for (int l = 1; l <= l_max; ++l) entries += (l + 1.0) * grid.point_count();
        check_table_budget(entries);
        for (int l = 1; l <= l_max; ++l) {
            s.degrees_.push_back(l);
            s.coefficients_.push_back(spectrum.coefficient(l));
        }
        s.tables_ = build_tables(s.degrees_, grid);
    } else {
        std::vector<double> weights(static_cast<std::size_t>(l_max) + 1, 0.0);
        for (int l = 1; l <= l_max; ++l) weights[static_cast<std::size_t>(l)] = spectrum.coefficient(l) * (2.0 * l + 1.0) / (4.0 * kPi);
        s.circle_sd_ = sqrt_all(folded_circle_weights(weights, grid.n()));
        auto trig = trig_tables(grid.n());
        s.cos_table_ = std::move(trig.cos_t);
        s.sin_table_ = std::move(trig.sin_t);
    }
    return s;
}

std::uint64_t LineSampler::stream_id(std::uint64_t seed, std::uint64_t replication) const {
    if (route_ == SamplingRoute::circle) return derive_stream_id(seed, replication, kCircleChannel);
    return derive_stream_id(seed, replication, static_cast<std::uint64_t>(degrees_.front()));
}

PathSample LineSampler::sample_circle(std::uint64_t seed, std::uint64_t replication) const {
    RngStream rng(seed, replication, kCircleChannel);
    PathSample path;
    path.values.assign(static_cast<std::size_t>(grid_.point_count()), 0.0);
    for (std::size_t r = 0; r < circle_sd_.size(); ++r) {
        const double x = rng.normal();
        const double y = rng.normal();
        const double sd = circle_sd_[r];
        if (sd == 0.0) continue;
        add_channel(path.values, static_cast<int>(r), sd * x, sd * y, cos_table_, sin_table_);
    }
    return path;
}

PathSample LineSampler::sample(std::uint64_t seed, std::uint64_t replication) const {
    if (route_ == SamplingRoute::circle) return sample_circle(seed, replication);
    PathSample path;
    path.values.assign(static_cast<std::size_t>(grid_.point_count()), 0.0);
    for (std::size_t d = 0; d < degrees_.size(); ++d) {
        const int l = degrees_[d];
        RngStream rng(seed, replication, static_cast<std::uint64_t>(l));
        const auto coeffs = sample_fl_coefficients(l, coefficients_[d], rng);
        const auto part = tables_[d].synthesize(coeffs);
        for (std::size_t i = 0; i < path.values.size(); ++i) path.values[i] += part.values[i];
    }
    return path;
}

PathSample LineSampler::sample_with_coefficients(std::uint64_t seed, std::uint64_t replication,
                                                 std::vector<double>& coeffs) const {
    if (route_ != SamplingRoute::harmonic || degrees_.size() != 1)
        throw std::logic_error("coefficients are only available for single-degree harmonic sampling");
    RngStream rng(seed, replication, static_cast<std::uint64_t>(degrees_.front()));
    coeffs = sample_fl_coefficients(degrees_.front(), coefficients_.front(), rng);
    return tables_.front().synthesize(coeffs);
}

PathSample sample_f_line(const PowerSpectrum& spectrum, const LineGrid& grid, std::uint64_t seed,
                         std::uint64_t replication, SamplingRoute route) {
    return LineSampler::full_field(spectrum, grid, route).sample(seed, replication);
}

FbmSampler::FbmSampler(const FbmSpec& spec, const LineGrid& grid, SamplingRoute route)
    : spec_(spec), grid_(grid), route_(route == SamplingRoute::automatic ? SamplingRoute::circle : route) {
    spec_.validate();
    const double rtt = fbm_time_covariance(spec_.hurst, spec_.t, spec_.t);
    const double rts = fbm_time_covariance(spec_.hurst, spec_.t, spec_.s);
    const double rss = fbm_time_covariance(spec_.hurst, spec_.s, spec_.s);
    l11_ = std::sqrt(rtt);
    l21_ = rts / l11_;
    l22_ = std::sqrt(std::max(rss - l21_ * l21_, 0.0));

    const int l_max = spec_.spectrum.l_max();
    if (route_ == SamplingRoute::harmonic) {
        std::vector<int> degrees;
        double entries = 0.0;
        for (int l = 0; l <= l_max; ++l) {
            degrees.push_back(l);
            entries += (l + 1.0) * grid.point_count();
        }
        check_table_budget(entries);
        tables_ = build_tables(degrees, grid);
    } else {
        std::vector<double> weights(static_cast<std::size_t>(l_max) + 1, 0.0);
        for (int l = 0; l <= l_max; ++l) weights[static_cast<std::size_t>(l)] = spec_.spectrum.coefficient(l) * (2.0 * l + 1.0);
        circle_sd_ = sqrt_all(folded_circle_weights(weights, grid.n()));
        auto trig = trig_tables(grid.n());
        cos_table_ = std::move(trig.cos_t);
        sin_table_ = std::move(trig.sin_t);
    }
}

std::uint64_t FbmSampler::stream_id(std::uint64_t seed, std::uint64_t replication) const {
    return derive_stream_id(seed, replication, route_ == SamplingRoute::circle ? kCircleChannel : 0);
}

FbmPathPair FbmSampler::sample(std::uint64_t seed, std::uint64_t replication) const {
    FbmPathPair out;
    const auto points = static_cast<std::size_t>(grid_.point_count());
    out.at_t.values.assign(points, 0.0);
    out.at_s.values.assign(points, 0.0);
    if (route_ == SamplingRoute::circle) {
        RngStream rng(seed, replication, kCircleChannel);
        for (std::size_t r = 0; r < circle_sd_.size(); ++r) {
            const double x1 = rng.normal(), x2 = rng.normal();
            const double y1 = rng.normal(), y2 = rng.normal();
            const double sd = circle_sd_[r];
            if (sd == 0.0) continue;
            const int rr = static_cast<int>(r);
            add_channel(out.at_t.values, rr, sd * l11_ * x1, sd * l11_ * y1, cos_table_, sin_table_);
            add_channel(out.at_s.values, rr, sd * (l21_ * x1 + l22_ * x2), sd * (l21_ * y1 + l22_ * y2), cos_table_,
                        sin_table_);
        }
        return out;
    }
    for (const auto& table : tables_) {
        const int l = table.ell();
        // A_l (2l+1) P_l = 4 pi A_l * (2l+1)/(4 pi) P_l: coefficient variance 4 pi A_l
        const double sd = std::sqrt(4.0 * kPi * spec_.spectrum.coefficient(l));
        RngStream rng(seed, replication, static_cast<std::uint64_t>(l));
        std::vector<double> ct(static_cast<std::size_t>(2 * l + 1));
        std::vector<double> cs(ct.size());
        for (std::size_t k = 0; k < ct.size(); ++k) {
            const double z1 = rng.normal(), z2 = rng.normal();
            ct[k] = l11_ * z1;
            cs[k] = l21_ * z1 + l22_ * z2;
        }
        const auto pt = table.synthesize(ct, sd);
        const auto ps = table.synthesize(cs, sd);
        for (std::size_t i = 0; i < points; ++i) {
            out.at_t.values[i] += pt.values[i];
            out.at_s.values[i] += ps.values[i];
        }
    }
    return out;
}

FbmPathPair sample_fbm_pair(const FbmSpec& spec, const LineGrid& grid, std::uint64_t seed, std::uint64_t replication,
                            SamplingRoute route) {
    return FbmSampler(spec, grid, route).sample(seed, replication);
}

double quadratic_variation(const std::vector<double>& values) {
    if (values.size() < 2) throw std::invalid_argument("quadratic_variation: path needs at least two points");
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        const double d = values[i + 1] - values[i];
        sum += d * d;
    }
    return sum;
}

double quadratic_variation(const PathSample& path) { return quadratic_variation(path.values); }

}  // namespace sphereqv

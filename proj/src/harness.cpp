#include "sphereqv/harness.hpp"

#include "sphereqv/config_io.hpp"
#include "sphereqv/estimators.hpp"
#include "sphereqv/rng.hpp"
#include "sphereqv/specfun.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

namespace sphereqv {

using nlohmann::json;

namespace {

const std::set<std::string> kOracleStats{"mean", "var", "k3", "k4", "estimator_error", "estimator_var", "classical_error",
                                         "classical_var"};

// Var(median) ~ (pi/2) sigma^2 / n for normal-like samples.
constexpr double kPiHalf = specfun::kPi / 2.0;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

struct CellPlan {
    int ell = 0;
    int n = 0;
    std::string regime;
};

std::vector<CellPlan> plan_cells(const ExperimentConfig& config) {
    const SampleSpec& sample = config.sample;
    auto label = [&](const std::optional<SweepSpec>& sweep) -> std::string {
        if (sample.target == TargetKind::full_field) return "full_field";
        if (sample.target == TargetKind::fbm) return "fbm";
        return sweep ? sweep->regime.name() : "fixed_ell";
    };
    auto ell_of = [&](int n, const std::optional<SweepSpec>& sweep) {
        if (sample.target != TargetKind::single_ell) return sample.spectrum.l_max();
        if (sweep && sweep->coupling != Coupling::none) return sweep->ell_for(n);
        return sample.ell;
    };
    std::vector<CellPlan> cells;
    if (!config.sweep) {
        cells.push_back({ell_of(sample.n, config.sweep), sample.n, label(config.sweep)});
        return cells;
    }
    for (int n : config.sweep->n_values) cells.push_back({ell_of(n, config.sweep), n, label(config.sweep)});
    return cells;
}

// Increment Gram of the simulated statistic for one cell.
IncrementGram exact_gram(const SampleSpec& spec) {
    const LineGrid grid(spec.n);
    switch (spec.target) {
        case TargetKind::single_ell: return increment_gram_fl(spec.ell, spec.c_ell, grid);
        case TargetKind::full_field: return increment_gram_f(spec.spectrum, grid).gram;
        case TargetKind::fbm: {
            const Eigen::MatrixXd joint = fbm_joint_gram(spec.fbm_spec(), grid);
            IncrementGram g;
            g.n = spec.n;
            g.sigma = joint.topLeftCorner(spec.n, spec.n);
            return g;
        }
    }
    return {};
}

std::string source_prefix(TargetKind target) {
    switch (target) {
        case TargetKind::single_ell: return "increment_gram_fl";
        case TargetKind::full_field: return "increment_gram_f";
        case TargetKind::fbm: return "fbm_joint_gram";
    }
    return "";
}

}  // namespace

void SampleSpec::validate() const {
    if (n < 1) throw std::invalid_argument("sample spec: n must be positive");
    if (replications < 1) throw std::invalid_argument("sample spec: replications must be at least 1");
    switch (target) {
        case TargetKind::single_ell:
            if (ell < 1) throw std::invalid_argument("sample spec: ell must be at least 1");
            if (!(c_ell >= 0.0)) throw std::invalid_argument("sample spec: c_ell must be non-negative");
            break;
        case TargetKind::full_field: break;
        case TargetKind::fbm: fbm_spec().validate(); break;
    }
}

FbmSpec SampleSpec::fbm_spec() const { return FbmSpec{hurst, spectrum, t, s}; }

void SweepSpec::validate() const {
    if (n_values.empty()) throw std::invalid_argument("sweep: n_values must not be empty");
    for (int n : n_values)
        if (n < 1) throw std::invalid_argument("sweep: every N must be positive");
    switch (coupling) {
        case Coupling::none: return;
        case Coupling::fixed:
            if (regime.kind != Regime::fixed_ell) throw std::invalid_argument("sweep: fixed coupling requires regime fixed_ell");
            if (ell < 1) throw std::invalid_argument("sweep: ell must be at least 1");
            return;
        case Coupling::power:
            if (beta > 1.0 && regime.kind != Regime::ell_faster)
                throw std::invalid_argument("sweep: l = N^beta with beta > 1 requires regime ell_faster");
            if (beta < 1.0 && regime.kind != Regime::ell_slower)
                throw std::invalid_argument("sweep: l = N^beta with beta < 1 requires regime ell_slower");
            if (beta == 1.0 && regime.kind != Regime::ell_comparable)
                throw std::invalid_argument("sweep: l = N requires regime ell_comparable");
            if (!(beta > 0.0)) throw std::invalid_argument("sweep: beta must be positive");
            return;
        case Coupling::linear:
            if (regime.kind != Regime::ell_comparable || regime.c != c)
                throw std::invalid_argument("sweep: l = cN requires regime ell_comparable with the same c");
            return;
    }
}

int SweepSpec::ell_for(int n) const {
    switch (coupling) {
        case Coupling::none:
        case Coupling::fixed: return ell;
        case Coupling::power: return std::max(1, static_cast<int>(std::floor(std::pow(static_cast<double>(n), beta) + 1e-9)));
        case Coupling::linear: return std::max(1, static_cast<int>(std::lround(c * n)));
    }
    return ell;
}

void ExperimentConfig::validate() const {
    sample.validate();
    if (statistics.empty()) throw std::invalid_argument("experiment: statistics must not be empty");
    for (const auto& s : statistics)
        if (!known_statistics().count(s)) throw std::invalid_argument("experiment: unknown statistic '" + s + "'");
    if (statistics.count("hurst") && sample.target != TargetKind::fbm)
        throw std::invalid_argument("experiment: statistic 'hurst' needs an fbm target");
    if (statistics.count("estimator_error") && sample.target != TargetKind::single_ell)
        throw std::invalid_argument("experiment: statistic 'estimator_error' needs a single_ell target");
    if (sweep) {
        sweep->validate();
        if (sample.target != TargetKind::single_ell && sweep->coupling != Coupling::none)
            throw std::invalid_argument("experiment: only single_ell targets couple l to N");
    }
    if (jackknife_batches < 2) throw std::invalid_argument("experiment: jackknife_batches must be at least 2");
    if (!(exact_perturbation > 0.0)) throw std::invalid_argument("experiment: exact_perturbation must be positive");
}

std::uint64_t cell_seed(std::uint64_t seed, int ell, int n) {
    return derive_stream_id(seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(ell));
}

ReplicationData simulate_replications(const SampleSpec& spec, const RunOptions& options) {
    spec.validate();
    const LineGrid grid(spec.n);
    const int reps = spec.replications;
    ReplicationData data;
    data.v.assign(static_cast<std::size_t>(reps), 0.0);
    data.stream_ids.assign(static_cast<std::size_t>(reps), 0);
    std::vector<char> done(static_cast<std::size_t>(reps), 0);
    auto stopped = [&] { return options.interrupt && options.interrupt->load(); };

    if (spec.target == TargetKind::fbm) {
        data.v_s.assign(static_cast<std::size_t>(reps), 0.0);
        const FbmSampler sampler(spec.fbm_spec(), grid, spec.route);
        parallel_for(reps, options.threads, [&](int r) {
            if (stopped()) return;
            const auto pair = sampler.sample(spec.seed, static_cast<std::uint64_t>(r));
            const auto i = static_cast<std::size_t>(r);
            data.v[i] = quadratic_variation(pair.at_t);
            data.v_s[i] = quadratic_variation(pair.at_s);
            data.stream_ids[i] = sampler.stream_id(spec.seed, static_cast<std::uint64_t>(r));
            done[i] = 1;
        });
    } else {
        const LineSampler sampler = spec.target == TargetKind::single_ell
                                        ? LineSampler::single_ell(spec.ell, spec.c_ell, grid, spec.route)
                                        : LineSampler::full_field(spec.spectrum, grid, spec.route);
        const bool coefficients = spec.target == TargetKind::single_ell && sampler.route() == SamplingRoute::harmonic;
        if (coefficients) data.c_hat.assign(static_cast<std::size_t>(reps), 0.0);
        parallel_for(reps, options.threads, [&](int r) {
            if (stopped()) return;
            const auto i = static_cast<std::size_t>(r);
            if (coefficients) {
                std::vector<double> coeffs;
                const auto path = sampler.sample_with_coefficients(spec.seed, static_cast<std::uint64_t>(r), coeffs);
                data.v[i] = quadratic_variation(path);
                data.c_hat[i] = estimate_cl_classical(coeffs, spec.ell).value;
            } else {
                data.v[i] = quadratic_variation(sampler.sample(spec.seed, static_cast<std::uint64_t>(r)));
            }
            data.stream_ids[i] = sampler.stream_id(spec.seed, static_cast<std::uint64_t>(r));
            done[i] = 1;
        });
    }
    for (char d : done) data.completed += d;
    return data;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    config.validate();
    ExperimentReport report;
    report.seed = config.sample.seed;
    report.replications = config.sample.replications;
    report.config_json = to_json(config).dump();
    const auto& stats = config.statistics;
    const double pert = config.exact_perturbation;

    std::vector<double> sweep_n, exact_means, exact_vars, emp_means, ks_values, fmb_values;
    for (const auto& cell : plan_cells(config)) {
        SampleSpec spec = config.sample;
        spec.n = cell.n;
        if (spec.target == TargetKind::single_ell) spec.ell = cell.ell;
        spec.seed = cell_seed(config.sample.seed, cell.ell, cell.n);

        const auto data = simulate_replications(spec, options);
        if (data.completed < spec.replications) {
            report.interrupted = true;
            break;
        }

        const bool want_ks = stats.count("ks_normal") > 0;
        const int p_exact = (stats.count("k4") || want_ks) ? 4 : stats.count("k3") ? 3 : 2;
        const int p_emp = stats.count("k4") ? 4 : stats.count("k3") ? 3 : 2;
        const IncrementGram gram = exact_gram(spec);
        const auto tr = trace_powers(gram, p_exact);
        const double exact_mean = tr[1];
        const double exact_var = 2.0 * tr[2];
        const auto emp = empirical_cumulants(data.v, p_emp, config.jackknife_batches);
        const std::string src = source_prefix(spec.target);

        auto add = [&](const std::string& stat, std::optional<double> empirical, std::optional<double> se,
                       std::optional<double> exact, const std::string& source) {
            if (exact) *exact *= pert;
            report.rows.push_back({cell.ell, cell.n, cell.regime, stat, empirical, se, exact, source, spec.seed});
            if (kOracleStats.count(stat) && empirical && se && exact) {
                ++report.oracle_cells;
                if (std::abs(*empirical - *exact) <= 4.0 * *se) ++report.oracle_within;
            }
        };

        if (stats.count("mean"))
            add("mean", emp.k[1], emp.se[1], exact_mean,
                spec.target == TargetKind::single_ell ? "exact_mean_vnl" : "trace(" + src + ")");
        if (stats.count("var")) add("var", emp.k[2], emp.se[2], exact_var, "exact_var_vnl(" + src + ")");
        if (stats.count("k3")) add("k3", emp.k[3], emp.se[3], 8.0 * tr[3], "trace_cumulant(" + src + ",3)");
        if (stats.count("k4")) add("k4", emp.k[4], emp.se[4], 48.0 * tr[4], "trace_cumulant(" + src + ",4)");
        double ks = 0.0, fmb = 0.0;
        if (want_ks) {
            std::vector<double> f(data.v.size());
            const double sd = std::sqrt(exact_var);
            for (std::size_t i = 0; i < f.size(); ++i) f[i] = (data.v[i] - exact_mean) / sd;
            ks = ks_normal(f);
            fmb = std::sqrt(48.0 * tr[4] / (exact_var * exact_var) / 6.0);
            add("ks_normal", ks, std::nullopt, std::nullopt, "ks_normal");
            add("fourth_moment_bound", std::nullopt, std::nullopt, fmb, "fourth_moment_bound(" + src + ")");
        }
        if (stats.count("estimator_error")) {
            const double norm = exact_mean_vnl(spec.ell, 1.0, spec.n);
            std::vector<double> rel(data.v.size());
            for (std::size_t i = 0; i < rel.size(); ++i) rel[i] = data.v[i] / norm / spec.c_ell - 1.0;
            const auto e = empirical_cumulants(rel, 2, config.jackknife_batches);
            add("estimator_error", e.k[1], e.se[1], 0.0, "estimate_cl");
            add("estimator_var", e.k[2], e.se[2], exact_var / (exact_mean * exact_mean), "exact_var_vnl/exact_mean_vnl^2");
            if (!data.c_hat.empty()) {
                std::vector<double> crel(data.c_hat.size());
                for (std::size_t i = 0; i < crel.size(); ++i) crel[i] = data.c_hat[i] / spec.c_ell - 1.0;
                const auto c = empirical_cumulants(crel, 2, config.jackknife_batches);
                add("classical_error", c.k[1], c.se[1], 0.0, "estimate_cl_classical");
                add("classical_var", c.k[2], c.se[2], 2.0 / (2.0 * spec.ell + 1.0), "estimate_cl_classical");
            }
        }
        if (stats.count("hurst")) {
            std::vector<double> h(data.v.size());
            for (std::size_t i = 0; i < h.size(); ++i) h[i] = estimate_hurst(data.v[i], data.v_s[i], spec.t, spec.s).value;
            const auto e = empirical_cumulants(h, 2, config.jackknife_batches);
            const double se_median = std::sqrt(kPiHalf * e.k[2] / static_cast<double>(h.size()));
            add("hurst_median", median(h), se_median, spec.hurst, "fbm_spec.hurst");
            add("hurst_mean", e.k[1], e.se[1], spec.hurst, "fbm_spec.hurst");
            if (e.k[2] > 0.0) {
                std::vector<double> z(h.size());
                for (std::size_t i = 0; i < z.size(); ++i) z[i] = (h[i] - e.k[1]) / std::sqrt(e.k[2]);
                add("hurst_ks_normal", ks_normal(z), std::nullopt, std::nullopt, "ks_normal(studentized hurst)");
            }
        }

        sweep_n.push_back(cell.n);
        exact_means.push_back(exact_mean * pert);
        exact_vars.push_back(exact_var * pert);
        emp_means.push_back(emp.k[1]);
        ks_values.push_back(ks);
        fmb_values.push_back(fmb);
    }

    if (sweep_n.size() >= 3) {
        auto slope = [&](const std::string& name, const std::vector<double>& xs, const std::vector<double>& ys,
                         LogCorrection corr) {
            try {
                report.slopes.push_back({name, loglog_slope(xs, ys, corr), static_cast<int>(xs.size())});
            } catch (const std::invalid_argument&) {
                // nonpositive or degenerate data: no slope for this series
            }
        };
        slope("exact_mean_vs_n", sweep_n, exact_means, LogCorrection::none);
        slope("exact_var_over_log_n_vs_n", sweep_n, exact_vars, LogCorrection::divide_by_log);
        slope("empirical_mean_vs_n", sweep_n, emp_means, LogCorrection::none);
        if (stats.count("ks_normal")) {
            std::vector<double> log_n(sweep_n.size());
            for (std::size_t i = 0; i < log_n.size(); ++i) log_n[i] = std::log(sweep_n[i]);
            slope("ks_normal_vs_log_n", log_n, ks_values, LogCorrection::none);
            slope("fourth_moment_bound_vs_log_n", log_n, fmb_values, LogCorrection::none);
        }
    }
    return report;
}

std::string report_to_csv(const ExperimentReport& report) {
    std::string out = "ell,n,regime,stat,empirical,se,exact,source_op,seed\n";
    for (const auto& row : report.rows) {
        out += std::to_string(row.ell) + ',' + std::to_string(row.n) + ',' + row.regime + ',' + row.stat + ',' +
               format_optional(row.empirical) + ',' + format_optional(row.se) + ',' + format_optional(row.exact) + ',' +
               row.source_op + ',' + std::to_string(row.seed) + '\n';
    }
    return out;
}

std::string report_to_json(const ExperimentReport& report) {
    json cells = json::array();
    std::map<std::pair<int, int>, std::size_t> index;
    for (const auto& row : report.rows) {
        const auto key = std::make_pair(row.n, row.ell);
        if (!index.count(key)) {
            index[key] = cells.size();
            cells.push_back(json{{"ell", row.ell}, {"n", row.n}, {"regime", row.regime}, {"seed", row.seed}, {"stats", json::object()}});
        }
        json stat = json::object();
        if (row.empirical) stat["empirical"] = *row.empirical;
        if (row.se) stat["se"] = *row.se;
        if (row.exact) stat["exact"] = *row.exact;
        stat["source_op"] = row.source_op;
        cells[index[key]]["stats"][row.stat] = stat;
    }
    json slopes = json::object();
    for (const auto& s : report.slopes)
        slopes[s.name] = json{{"slope", s.fit.slope}, {"std_error", s.fit.std_error}, {"intercept", s.fit.intercept}, {"points", s.points}};
    json j{{"config", json::parse(report.config_json)},
           {"seed", report.seed},
           {"replications", report.replications},
           {"interrupted", report.interrupted},
           {"cells", cells},
           {"slopes", slopes},
           {"oracle_agreement",
            json{{"cells", report.oracle_cells},
                 {"within_4se", report.oracle_within},
                 {"fraction", report.oracle_fraction()},
                 {"pass", report.oracle_pass()}}}};
    return j.dump(2) + "\n";
}

void write_report(const ExperimentReport& report, const std::string& prefix) {
    auto write = [](const std::string& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
        out << text;
        if (!out) throw std::runtime_error("write to '" + path + "' failed");
    };
    write(prefix + ".json", report_to_json(report));
    write(prefix + ".csv", report_to_csv(report));
}

}  // namespace sphereqv

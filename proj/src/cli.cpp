#include "sphereqv/cli.hpp"

#include "sphereqv/config_io.hpp"
#include "sphereqv/estimators.hpp"
#include "sphereqv/harness.hpp"
#include "sphereqv/moments.hpp"
#include "sphereqv/rng.hpp"
#include "sphereqv/specfun.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <thread>

namespace sphereqv {

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitStrict = 3;
constexpr int kExitInterrupted = 130;

constexpr int kMaxGramN = 8192;
constexpr int kMaxCumulantN = 4096;

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

std::string fmt(double v, const char* spec = "%.12g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

int default_threads() {
    if (const char* env = std::getenv("SPHEREQV_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
        throw UsageError("SPHEREQV_THREADS must be a positive integer");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------- moments

struct MomentsArgs {
    std::optional<int> ell, n, p_max;
    std::optional<double> cl, c;
    std::optional<std::string> regime, csv, config;
};

int cmd_moments(const MomentsArgs& a, std::ostream& out) {
    json file = json::object();
    if (a.config) {
        file = load_json_file(*a.config);
        if (!file.is_object()) throw UsageError("moments config must be a JSON object");
        for (const auto& item : file.items())
            if (item.key() != "ell" && item.key() != "n" && item.key() != "cl" && item.key() != "regime" &&
                item.key() != "c" && item.key() != "p_max")
                throw UsageError("unknown key '" + item.key() + "' in moments config");
    }
    auto pick_int = [&](const std::optional<int>& flag, const char* key, std::optional<int> fallback) -> std::optional<int> {
        if (flag) return flag;
        if (file.contains(key)) return file.at(key).get<int>();
        return fallback;
    };
    auto pick_double = [&](const std::optional<double>& flag, const char* key, std::optional<double> fallback) -> std::optional<double> {
        if (flag) return flag;
        if (file.contains(key)) return file.at(key).get<double>();
        return fallback;
    };
    const auto ell = pick_int(a.ell, "ell", std::nullopt);
    const auto n = pick_int(a.n, "n", std::nullopt);
    const int p_max = *pick_int(a.p_max, "p_max", 4);
    const double cl = *pick_double(a.cl, "cl", 1.0);
    const auto c = pick_double(a.c, "c", std::nullopt);
    std::optional<std::string> regime_name = a.regime;
    if (!regime_name && file.contains("regime")) regime_name = file.at("regime").get<std::string>();

    if (!ell || *ell < 1) throw UsageError("--ell must be an integer >= 1");
    if (!n || *n < 1) throw UsageError("--n must be an integer >= 1");
    if (!(cl > 0.0)) throw UsageError("--cl must be positive");
    if (p_max < 2 || p_max > 8) throw UsageError("--p-max must lie in [2, 8]");
    std::optional<RegimeTag> regime;
    if (regime_name) {
        if (*regime_name == "ell_comparable" && !c) throw UsageError("--regime ell_comparable needs --c");
        try {
            regime = RegimeTag::parse(*regime_name, c.value_or(0.0));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    if (*n > kMaxGramN) throw std::runtime_error("N above " + std::to_string(kMaxGramN) + " is not supported");
    if (p_max > 2 && *n > kMaxCumulantN)
        throw std::runtime_error("cumulants beyond p = 2 are limited to N <= " + std::to_string(kMaxCumulantN));

    const LineGrid grid(*n);
    const auto gram = increment_gram_fl(*ell, cl, grid);
    const auto report = moment_report(gram, p_max, regime.value_or(RegimeTag::fixed()));
    const double mean = exact_mean_vnl(*ell, cl, *n);
    if (!std::isfinite(mean) || !std::isfinite(report.variance)) throw std::runtime_error("non-finite moment");

    std::vector<std::pair<std::string, double>> table{{"mean", mean}, {"variance", report.variance}};
    for (int p = 3; p <= p_max; ++p) table.emplace_back("kappa" + std::to_string(p) + "_normalized", report.cumulants[static_cast<std::size_t>(p - 2)]);
    if (p_max >= 4) table.emplace_back("fourth_moment_bound", std::sqrt(report.cumulants[2] / 6.0));
    if (regime) {
        const double am = asymptotic_mean(*regime, *ell, cl, *n);
        const double av = asymptotic_var(*regime, *ell, cl, *n);
        table.emplace_back("asymptotic_mean", am);
        table.emplace_back("mean_ratio", mean / am);
        table.emplace_back("asymptotic_variance", av);
        table.emplace_back("variance_ratio", report.variance / av);
    }
    out << "ell " << *ell << "  n " << *n << "  cl " << fmt(cl);
    if (regime) out << "  regime " << regime->name();
    out << "\n";
    for (const auto& [name, value] : table) out << name << " " << fmt(value) << "\n";
    if (a.csv) {
        std::ofstream csv(*a.csv, std::ios::binary);
        if (!csv) throw std::runtime_error("cannot write '" + *a.csv + "'");
        csv << "quantity,value\n";
        for (const auto& [name, value] : table) csv << name << "," << fmt(value, "%.17g") << "\n";
        if (!csv) throw std::runtime_error("write to '" + *a.csv + "' failed");
    }
    return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string spec_file;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::optional<std::string> out;
    std::optional<int> threads;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    const json j = load_json_file(a.spec_file);
    SampleSpec spec = sample_spec_from_json(j);
    if (a.seed) spec.seed = *a.seed;
    if (a.reps) spec.replications = *a.reps;
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    RunOptions options;
    options.threads = a.threads.value_or(default_threads());
    options.interrupt = &cli_interrupt_flag();
    const auto data = simulate_replications(spec, options);

    std::string text = spec.target == TargetKind::fbm ? "rep,v_t,v_s,stream_id\n" : "rep,v,stream_id\n";
    for (int r = 0; r < data.completed && r < spec.replications; ++r) {
        const auto i = static_cast<std::size_t>(r);
        text += std::to_string(r) + "," + fmt(data.v[i], "%.17g");
        if (spec.target == TargetKind::fbm) text += "," + fmt(data.v_s[i], "%.17g");
        text += "," + std::to_string(data.stream_ids[i]) + "\n";
    }
    if (a.out) {
        std::ofstream file(*a.out, std::ios::binary);
        if (!file) throw std::runtime_error("cannot write '" + *a.out + "'");
        file << text;
        if (!file) throw std::runtime_error("write to '" + *a.out + "' failed");
    } else {
        out << text;
    }
    return data.completed < spec.replications ? kExitInterrupted : kExitOk;
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
    std::string mode;
    std::optional<double> v, v_t, v_s, t, s, c;
    std::optional<int> ell, n;
    std::vector<double> coeffs;
};

json estimate_json(const EstimateResult& r) {
    return json{{"value", r.value}, {"normalizer", r.normalizer}, {"variant", variant_name(r.variant)},
                {"bias_exact", r.bias_exact}, {"c", r.c}};
}

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
    auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw UsageError(msg);
    };
    json result;
    if (a.mode == "hurst") {
        need(a.v_t && a.v_s && a.t && a.s, "--mode hurst requires --v-t, --v-s, --t and --s");
        need(!a.v && !a.ell && !a.n && a.coeffs.empty(), "--mode hurst takes only --v-t, --v-s, --t and --s");
        need(*a.v_t > 0.0 && *a.v_s > 0.0, "--v-t and --v-s must be positive");
        need(*a.t > 0.0 && *a.s > 0.0 && *a.t != *a.s, "--t and --s must be distinct positive times");
        const auto h = estimate_hurst(*a.v_t, *a.v_s, *a.t, *a.s);
        result = json{{"value", h.value}, {"in_range", h.in_range}, {"variant", "hurst"}};
    } else if (a.mode == "classical") {
        need(a.ell.has_value(), "--mode classical requires --ell and --coeffs");
        need(a.coeffs.size() == static_cast<std::size_t>(2 * *a.ell + 1), "--coeffs must hold 2l+1 values");
        result = estimate_json(estimate_cl_classical(a.coeffs, *a.ell));
    } else if (a.mode == "cl" || a.mode == "cl1" || a.mode == "cl2" || a.mode == "cl3") {
        need(a.v && a.ell && a.n, "--mode " + a.mode + " requires --v, --ell and --n");
        need(*a.v >= 0.0, "--v must be non-negative");
        need(*a.ell >= 1 && *a.n >= 1, "--ell and --n must be >= 1");
        need(!a.v_t && !a.v_s && !a.t && !a.s && a.coeffs.empty(), "--mode " + a.mode + " does not take hurst or coefficient flags");
        if (a.mode == "cl") {
            result = estimate_json(estimate_cl(*a.v, *a.ell, *a.n));
        } else {
            const int variant = a.mode[2] - '0';
            double c = 0.0;
            if (variant == 2) {
                need(a.c.has_value() && *a.c > 0.0, "--mode cl2 requires --c > 0");
                c = *a.c;
            } else {
                need(!a.c, "--c only applies to --mode cl2");
            }
            result = estimate_json(estimate_cl_variant(*a.v, *a.ell, *a.n, variant, c));
        }
    } else {
        throw UsageError("--mode must be one of cl, cl1, cl2, cl3, classical, hurst");
    }
    out << result.dump() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- experiment

struct ExperimentArgs {
    std::string config;
    std::optional<std::string> output;
    std::optional<int> threads;
    bool strict = false;
};

int cmd_experiment(const ExperimentArgs& a, std::ostream& out) {
    ExperimentConfig config = experiment_from_json(load_json_file(a.config));
    if (a.output) config.output = *a.output;
    if (config.output.empty()) throw UsageError("no output prefix: set \"output\" in the config or pass --output");
    RunOptions options;
    options.threads = a.threads.value_or(default_threads());
    options.interrupt = &cli_interrupt_flag();
    const auto report = run_experiment(config, options);
    write_report(report, config.output);
    out << "wrote " << config.output << ".json and " << config.output << ".csv\n";
    out << "oracle agreement " << report.oracle_within << "/" << report.oracle_cells << " within 4 SE ("
        << fmt(100.0 * report.oracle_fraction(), "%.1f") << "%)\n";
    for (const auto& s : report.slopes)
        out << "slope " << s.name << " " << fmt(s.fit.slope, "%.6g") << " +- " << fmt(s.fit.std_error, "%.3g") << "\n";
    if (report.interrupted) {
        out << "interrupted: partial report written\n";
        return kExitInterrupted;
    }
    if (a.strict && !report.oracle_pass()) {
        out << "strict: oracle agreement below 95%\n";
        return kExitStrict;
    }
    return kExitOk;
}

// ---------------------------------------------------------------- specfun-check

int cmd_specfun_check(std::uint64_t seed, std::ostream& out) {
    RngStream rng(seed, 0, 0);
    bool all = true;
    auto line = [&](const std::string& name, bool pass, const std::string& detail) {
        all = all && pass;
        out << (pass ? "PASS " : "FAIL ") << name << "  " << detail << "\n";
    };

    {
        double worst = 0.0;
        std::vector<double> p(2001);
        for (int k = 0; k < 1000; ++k) {
            const double x = 2.0 * rng.uniform() - 1.0;
            specfun::legendre_p_sequence(2000, x, p);
            for (double v : p) worst = std::max(worst, std::abs(v));
        }
        line("legendre_bounded", worst <= 1.0 + 1e-12, "max |P_l(x)| = " + fmt(worst));
    }
    {
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const int l = 1 + static_cast<int>(rng.uniform() * 200);
            const double x = (2.0 * rng.uniform() - 1.0) * 0.999;
            const double lhs = (1.0 - x * x) * specfun::legendre_p_deriv(l, x);
            const double rhs = l * (specfun::legendre_p(l - 1, x) - x * specfun::legendre_p(l, x));
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
        }
        line("derivative_recurrence", worst <= 1e-10, "max rel. residual = " + fmt(worst));
    }
    {
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            const int l = static_cast<int>(rng.uniform() * 51);
            const double a = rng.uniform() * specfun::kPi, b = rng.uniform() * specfun::kPi;
            double sum = 0.0;
            for (int m = 0; m <= l; ++m)
                sum += (m == 0 ? 1.0 : 2.0) * specfun::real_harmonic_meridian(l, m, a) * specfun::real_harmonic_meridian(l, m, b);
            const double expect = (2.0 * l + 1.0) / (4.0 * specfun::kPi) * specfun::legendre_p(l, std::cos(a - b));
            worst = std::max(worst, std::abs(sum - expect));
        }
        line("addition_theorem", worst <= 1e-9, "max abs. error = " + fmt(worst));
    }
    {
        double c_fit = 0.0;
        for (int l : {64, 256, 1024})
            for (int k = 0; k <= 40; ++k) {
                const double a = 0.01 * std::pow(100.0, k / 40.0);
                const double err = std::abs(specfun::legendre_p(l, std::cos(a)) - specfun::hilb_approx_p(l, a));
                c_fit = std::max(c_fit, err / (std::pow(l, -1.5) * std::sqrt(a)));
            }
        line("hilb_error", std::isfinite(c_fit), "fitted c = " + fmt(c_fit, "%.4g") + " in |P - hilb| <= c l^-3/2 sqrt(a)");
    }
    {
        const double z = specfun::bessel_j(0, 2.404825557695773);
        line("bessel_first_zero", std::abs(z) <= 1e-10, "J0(2.404825557695773) = " + fmt(z));
    }
    return all ? kExitOk : kExitFailure;
}

}  // namespace

std::atomic<bool>& cli_interrupt_flag() {
    static std::atomic<bool> flag{false};
    return flag;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quadratic variations of isotropic Gaussian fields on the sphere along a meridian.\n"
                 "Units: degrees l and grid sizes N are dimensionless integers; angles are radians;\n"
                 "seeds are unsigned 64-bit integers; fBm times t, s are positive reals.", "sphereqv"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 ok, 1 numeric or I/O failure, 2 bad flags or config, 3 strict oracle failure.");

    MomentsArgs ma;
    auto* moments = app.add_subcommand("moments", "Exact moments of V_{N,l} and, with --regime, the asymptotic counterparts");
    moments->add_option("--ell", ma.ell, "degree l (dimensionless integer >= 1)");
    moments->add_option("--n", ma.n, "number of increments N (dimensionless integer >= 1)");
    moments->add_option("--cl", ma.cl, "angular power spectrum value C_l (positive real, default 1)");
    moments->add_option("--regime", ma.regime, "fixed_ell | ell_faster | ell_comparable | ell_slower");
    moments->add_option("--c", ma.c, "limit of l/N for ell_comparable (positive real)");
    moments->add_option("--p-max", ma.p_max, "highest cumulant order (integer in [2, 8], default 4)");
    moments->add_option("--csv", ma.csv, "also write the table as CSV to this path");
    moments->add_option("--config", ma.config, "JSON file with keys ell, n, cl, regime, c, p_max; flags take precedence");

    SimulateArgs sa;
    auto* simulate = app.add_subcommand("simulate", "Sample V_N replications from a JSON sample spec; CSV rows rep,v,stream_id");
    simulate->add_option("--spec-file", sa.spec_file, "JSON sample spec (target, n, seed, replications, route)")->required();
    simulate->add_option("--seed", sa.seed, "RNG seed (unsigned 64-bit integer); overrides the spec");
    simulate->add_option("--reps", sa.reps, "number of replications (integer >= 1); overrides the spec");
    simulate->add_option("--out", sa.out, "CSV output path (default: stdout)");
    simulate->add_option("--threads", sa.threads, "worker threads (integer >= 1; default SPHEREQV_THREADS or all cores)")
        ->check(CLI::PositiveNumber);

    EstimateArgs ea;
    auto* estimate = app.add_subcommand("estimate", "Angular power spectrum and Hurst estimators; prints JSON");
    estimate->add_option("--mode", ea.mode, "cl | cl1 | cl2 | cl3 | classical | hurst")->required();
    estimate->add_option("--v", ea.v, "quadratic variation V_{N,l} (non-negative real)");
    estimate->add_option("--ell", ea.ell, "degree l (dimensionless integer >= 1)");
    estimate->add_option("--n", ea.n, "number of increments N (dimensionless integer >= 1)");
    estimate->add_option("--c", ea.c, "limit of l/N for cl2 (positive real)");
    estimate->add_option("--coeffs", ea.coeffs, "2l+1 real harmonic coefficients for classical")->delimiter(',');
    estimate->add_option("--v-t", ea.v_t, "V_N(B_t) for hurst (positive real)");
    estimate->add_option("--v-s", ea.v_s, "V_N(B_s) for hurst (positive real)");
    estimate->add_option("--t", ea.t, "first time t (positive real)");
    estimate->add_option("--s", ea.s, "second time s (positive real, distinct from t)");

    ExperimentArgs xa;
    auto* experiment = app.add_subcommand("experiment", "Run a Monte Carlo experiment; writes <output>.json and <output>.csv");
    experiment->add_option("--config", xa.config, "JSON experiment config")->required();
    experiment->add_option("--output", xa.output, "output path prefix; overrides the config");
    experiment->add_option("--threads", xa.threads, "worker threads (integer >= 1; default SPHEREQV_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    experiment->add_flag("--strict", xa.strict, "exit 3 unless >= 95% of oracle cells agree within 4 SE");

    std::uint64_t check_seed = 20240601;
    auto* check = app.add_subcommand("specfun-check", "Run the special-function invariant suite");
    check->add_option("--seed", check_seed, "RNG seed for random test points (unsigned 64-bit integer)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (moments->parsed()) return cmd_moments(ma, out);
        if (simulate->parsed()) return cmd_simulate(sa, out);
        if (estimate->parsed()) return cmd_estimate(ea, out);
        if (experiment->parsed()) return cmd_experiment(xa, out);
        if (check->parsed()) return cmd_specfun_check(check_seed, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const json::exception& e) {
        err << "error: bad config value: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace sphereqv

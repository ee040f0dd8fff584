#pragma once

// Monte Carlo experiment engine. Replications run on worker threads, each
// with its own derived RNG streams; every per-replication value is stored by
// index and reduced in a fixed order, so reports do not depend on the number
// of workers.

#include "sphereqv/covariance.hpp"
#include "sphereqv/moments.hpp"
#include "sphereqv/simulate.hpp"
#include "sphereqv/statistics.hpp"

#include <atomic>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sphereqv {

enum class TargetKind { single_ell, full_field, fbm };

struct SampleSpec {
    TargetKind target = TargetKind::single_ell;
    int ell = 1;           ///< single_ell only
    double c_ell = 1.0;    ///< single_ell only
    PowerSpectrum spectrum = PowerSpectrum::from_values({0.0, 1.0});  ///< full_field and fbm (A_l)
    double hurst = 0.5;    ///< fbm only
    double t = 1.0;        ///< fbm only
    double s = 2.0;        ///< fbm only
    int n = 16;
    std::uint64_t seed = 0;
    int replications = 1000;
    SamplingRoute route = SamplingRoute::automatic;

    void validate() const;
    FbmSpec fbm_spec() const;
};

/// How l follows N along a sweep.
enum class Coupling { none, fixed, power, linear };

struct SweepSpec {
    std::vector<int> n_values;
    Coupling coupling = Coupling::none;
    int ell = 1;        ///< fixed
    double beta = 1.0;  ///< power: l = floor(N^beta)
    double c = 1.0;     ///< linear: l = max(1, round(c N))
    RegimeTag regime;

    /// Throws std::invalid_argument if the coupling does not fit the regime
    /// (fixed <-> fixed_ell, power with beta > 1 <-> ell_faster,
    /// beta < 1 <-> ell_slower, linear <-> ell_comparable with the same c).
    void validate() const;
    int ell_for(int n) const;
};

inline const std::set<std::string>& known_statistics() {
    static const std::set<std::string> names{"mean", "var", "k3", "k4", "ks_normal", "estimator_error", "hurst"};
    return names;
}

struct ExperimentConfig {
    SampleSpec sample;
    std::optional<SweepSpec> sweep;
    std::set<std::string> statistics{"mean", "var"};
    std::string output;             ///< path prefix for <output>.json and <output>.csv
    double exact_perturbation = 1.0;  ///< multiplies every exact value; test hook for strict mode
    int jackknife_batches = 100;

    void validate() const;
};

/// One CSV row.
struct ReportRow {
    int ell = 0;
    int n = 0;
    std::string regime;
    std::string stat;
    std::optional<double> empirical;
    std::optional<double> se;
    std::optional<double> exact;
    std::string source_op;
    std::uint64_t seed = 0;
};

struct SlopeSummary {
    std::string name;
    SlopeFit fit;
    int points = 0;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;
    std::vector<SlopeSummary> slopes;
    int oracle_cells = 0;
    int oracle_within = 0;
    bool interrupted = false;
    std::uint64_t seed = 0;
    int replications = 0;
    std::string config_json;  ///< normalized config the report was produced from

    double oracle_fraction() const { return oracle_cells == 0 ? 1.0 : static_cast<double>(oracle_within) / oracle_cells; }
    bool oracle_pass() const { return oracle_fraction() >= 0.95; }
};

struct RunOptions {
    int threads = 1;
    /// Checked between replications; when set, finished cells are kept and
    /// the report is marked interrupted.
    const std::atomic<bool>* interrupt = nullptr;
};

/// Seed of one sweep cell: the streams of cell (l, N) use this as their seed.
std::uint64_t cell_seed(std::uint64_t seed, int ell, int n);

/// Runs `count` independent tasks f(i) on `threads` workers; f must write only to slot i.
template <class F>
void parallel_for(int count, int threads, F&& f);

/// Per-replication quadratic variations for a sample spec (fbm: pairs V_t, V_s).
struct ReplicationData {
    std::vector<double> v;      ///< V_N (at time t for fbm)
    std::vector<double> v_s;    ///< fbm only
    std::vector<double> c_hat;  ///< single_ell: classical estimate from the drawn coefficients
    std::vector<std::uint64_t> stream_ids;
    int completed = 0;
};

ReplicationData simulate_replications(const SampleSpec& spec, const RunOptions& options);

ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

std::string report_to_csv(const ExperimentReport& report);
std::string report_to_json(const ExperimentReport& report);

/// Writes <prefix>.json and <prefix>.csv. Throws std::runtime_error on I/O failure.
void write_report(const ExperimentReport& report, const std::string& prefix);

}  // namespace sphereqv

#include "sphereqv/detail/parallel.hpp"

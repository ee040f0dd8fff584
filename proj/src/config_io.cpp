#include "sphereqv/config_io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>

namespace sphereqv {

using nlohmann::json;

namespace {

void require_object(const json& j, const char* what) {
    if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
}

void reject_unknown(const json& j, const char* what, std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* key : allowed) ok = ok || item.key() == key;
        if (!ok) throw ConfigError(std::string("unknown key '") + item.key() + "' in " + what);
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

template <class T>
T get_required(const json& j, const char* key, const char* what) {
    if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "' in " + what);
    return get_or<T>(j, key, T{});
}

}  // namespace

std::string route_name(SamplingRoute route) {
    switch (route) {
        case SamplingRoute::automatic: return "automatic";
        case SamplingRoute::harmonic: return "harmonic";
        case SamplingRoute::circle: return "circle";
    }
    return "automatic";
}

SamplingRoute parse_route(const std::string& name) {
    if (name == "automatic") return SamplingRoute::automatic;
    if (name == "harmonic") return SamplingRoute::harmonic;
    if (name == "circle") return SamplingRoute::circle;
    throw ConfigError("unknown sampling route '" + name + "'");
}

std::string target_name(TargetKind kind) {
    switch (kind) {
        case TargetKind::single_ell: return "single_ell";
        case TargetKind::full_field: return "full_field";
        case TargetKind::fbm: return "fbm";
    }
    return "single_ell";
}

TargetKind parse_target(const std::string& name) {
    if (name == "single_ell") return TargetKind::single_ell;
    if (name == "full_field") return TargetKind::full_field;
    if (name == "fbm") return TargetKind::fbm;
    throw ConfigError("unknown target kind '" + name + "'");
}

std::string coupling_name(Coupling coupling) {
    switch (coupling) {
        case Coupling::none: return "none";
        case Coupling::fixed: return "fixed";
        case Coupling::power: return "power";
        case Coupling::linear: return "linear";
    }
    return "none";
}

Coupling parse_coupling(const std::string& name) {
    if (name == "none") return Coupling::none;
    if (name == "fixed") return Coupling::fixed;
    if (name == "power") return Coupling::power;
    if (name == "linear") return Coupling::linear;
    throw ConfigError("unknown coupling '" + name + "'");
}

json to_json(const PowerSpectrum& spectrum) {
    if (spectrum.kind() == PowerSpectrum::Kind::power_law)
        return json{{"kind", "power_law"}, {"amplitude", spectrum.amplitude()}, {"epsilon", spectrum.epsilon()},
                    {"l_max", spectrum.l_max()}};
    std::vector<double> values;
    for (int l = 0; l <= spectrum.l_max(); ++l) values.push_back(spectrum.coefficient(l));
    return json{{"kind", "explicit"}, {"values", values}};
}

PowerSpectrum spectrum_from_json(const json& j) {
    require_object(j, "spectrum");
    const auto kind = get_required<std::string>(j, "kind", "spectrum");
    try {
        if (kind == "power_law") {
            reject_unknown(j, "spectrum", {"kind", "amplitude", "epsilon", "l_max"});
            return PowerSpectrum::power_law(get_or<double>(j, "amplitude", 1.0), get_required<double>(j, "epsilon", "spectrum"),
                                            get_required<int>(j, "l_max", "spectrum"));
        }
        if (kind == "explicit") {
            reject_unknown(j, "spectrum", {"kind", "values"});
            return PowerSpectrum::from_values(get_required<std::vector<double>>(j, "values", "spectrum"));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("spectrum: ") + e.what());
    }
    throw ConfigError("unknown spectrum kind '" + kind + "'");
}

json to_json(const SampleSpec& spec) {
    json target;
    target["kind"] = target_name(spec.target);
    switch (spec.target) {
        case TargetKind::single_ell:
            target["ell"] = spec.ell;
            target["c_ell"] = spec.c_ell;
            break;
        case TargetKind::full_field: target["spectrum"] = to_json(spec.spectrum); break;
        case TargetKind::fbm:
            target["spectrum"] = to_json(spec.spectrum);
            target["hurst"] = spec.hurst;
            target["t"] = spec.t;
            target["s"] = spec.s;
            break;
    }
    return json{{"target", target}, {"n", spec.n}, {"seed", spec.seed}, {"replications", spec.replications},
                {"route", route_name(spec.route)}};
}

SampleSpec sample_spec_from_json(const json& j) {
    require_object(j, "sample spec");
    reject_unknown(j, "sample spec", {"target", "n", "seed", "replications", "route"});
    SampleSpec spec;
    const json& target = j.contains("target") ? j.at("target") : throw ConfigError("missing key 'target' in sample spec");
    require_object(target, "target");
    spec.target = parse_target(get_required<std::string>(target, "kind", "target"));
    switch (spec.target) {
        case TargetKind::single_ell:
            reject_unknown(target, "target", {"kind", "ell", "c_ell"});
            spec.ell = get_required<int>(target, "ell", "target");
            spec.c_ell = get_or<double>(target, "c_ell", 1.0);
            break;
        case TargetKind::full_field:
            reject_unknown(target, "target", {"kind", "spectrum"});
            if (!target.contains("spectrum")) throw ConfigError("missing key 'spectrum' in target");
            spec.spectrum = spectrum_from_json(target.at("spectrum"));
            break;
        case TargetKind::fbm:
            reject_unknown(target, "target", {"kind", "spectrum", "hurst", "t", "s"});
            if (!target.contains("spectrum")) throw ConfigError("missing key 'spectrum' in target");
            spec.spectrum = spectrum_from_json(target.at("spectrum"));
            spec.hurst = get_required<double>(target, "hurst", "target");
            spec.t = get_or<double>(target, "t", 2.0);
            spec.s = get_or<double>(target, "s", 1.0);
            break;
    }
    spec.n = get_or<int>(j, "n", spec.n);
    spec.seed = get_or<std::uint64_t>(j, "seed", spec.seed);
    spec.replications = get_or<int>(j, "replications", spec.replications);
    spec.route = parse_route(get_or<std::string>(j, "route", "automatic"));
    return spec;
}

json to_json(const SweepSpec& sweep) {
    json j{{"n_values", sweep.n_values}, {"coupling", coupling_name(sweep.coupling)}, {"regime", sweep.regime.name()}};
    switch (sweep.coupling) {
        case Coupling::fixed: j["ell"] = sweep.ell; break;
        case Coupling::power: j["beta"] = sweep.beta; break;
        case Coupling::linear: j["c"] = sweep.c; break;
        case Coupling::none: break;
    }
    return j;
}

SweepSpec sweep_from_json(const json& j) {
    require_object(j, "sweep");
    reject_unknown(j, "sweep", {"n_values", "coupling", "ell", "beta", "c", "regime"});
    SweepSpec sweep;
    sweep.n_values = get_required<std::vector<int>>(j, "n_values", "sweep");
    sweep.coupling = parse_coupling(get_or<std::string>(j, "coupling", "none"));
    sweep.ell = get_or<int>(j, "ell", 1);
    sweep.beta = get_or<double>(j, "beta", 1.0);
    sweep.c = get_or<double>(j, "c", 1.0);
    const auto regime = get_or<std::string>(j, "regime", "fixed_ell");
    try {
        sweep.regime = RegimeTag::parse(regime, sweep.c);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("sweep: ") + e.what());
    }
    return sweep;
}

json to_json(const ExperimentConfig& config) {
    json j = to_json(config.sample);
    j["statistics"] = std::vector<std::string>(config.statistics.begin(), config.statistics.end());
    if (config.sweep) j["sweep"] = to_json(*config.sweep);
    j["output"] = config.output;
    j["jackknife_batches"] = config.jackknife_batches;
    if (config.exact_perturbation != 1.0) j["exact_perturbation"] = config.exact_perturbation;
    return j;
}

ExperimentConfig experiment_from_json(const json& j) {
    require_object(j, "experiment config");
    reject_unknown(j, "experiment config",
                   {"target", "n", "seed", "replications", "route", "statistics", "sweep", "output", "jackknife_batches",
                    "exact_perturbation"});
    ExperimentConfig config;
    json sample = json::object();
    for (const char* key : {"target", "n", "seed", "replications", "route"})
        if (j.contains(key)) sample[key] = j.at(key);
    config.sample = sample_spec_from_json(sample);
    if (j.contains("statistics")) {
        config.statistics.clear();
        for (const auto& s : get_or<std::vector<std::string>>(j, "statistics", {})) config.statistics.insert(s);
    }
    if (j.contains("sweep")) config.sweep = sweep_from_json(j.at("sweep"));
    config.output = get_or<std::string>(j, "output", "");
    config.jackknife_batches = get_or<int>(j, "jackknife_batches", config.jackknife_batches);
    config.exact_perturbation = get_or<double>(j, "exact_perturbation", 1.0);
    try {
        config.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return config;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

}  // namespace sphereqv

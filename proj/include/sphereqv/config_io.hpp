#pragma once

// JSON encoding of spectra, sample specs and experiment configs. Decoders
// reject unknown keys so that typos fail loudly.

#include "sphereqv/harness.hpp"

#include <json.hpp>

#include <string>

namespace sphereqv {

/// Thrown for malformed or inconsistent configuration.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

std::string route_name(SamplingRoute route);
SamplingRoute parse_route(const std::string& name);
std::string target_name(TargetKind kind);
TargetKind parse_target(const std::string& name);
std::string coupling_name(Coupling coupling);
Coupling parse_coupling(const std::string& name);

nlohmann::json to_json(const PowerSpectrum& spectrum);
PowerSpectrum spectrum_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SampleSpec& spec);
SampleSpec sample_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SweepSpec& sweep);
SweepSpec sweep_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

/// Reads and parses a JSON file. Throws std::runtime_error if it cannot be
/// read and ConfigError if it does not parse.
nlohmann::json load_json_file(const std::string& path);

}  // namespace sphereqv

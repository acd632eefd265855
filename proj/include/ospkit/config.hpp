#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ospkit/channel.hpp"
#include "ospkit/model.hpp"
#include "ospkit/scheduler.hpp"
#include "ospkit/simulation.hpp"

namespace ospkit::config {

/// Everything needed to run one experiment, as read from a JSON file.
///
/// {
///   "preset":  "name"                                   (optional)
///   "model":   {"A", "B", "C", "Q", "R": row-major nested arrays,
///               "T": number, "observer_periods": [number]}
///   "channel": {"seed": integer,
///               "observation_airtime": [{"lo", "hi"}] (one per observer),
///               "action_airtime": [{"lo", "hi"}]  (one per agent)}
///              or {"seed": integer, "trace": "path", "agents": integer}
///   "run":     {"policy", "cycles", "initial_cov_scale", "input": [number]}
///   "output":  {"csv": "path"}
/// }
struct ExperimentConfig {
    std::string preset;
    SystemModel model;
    sim::ChannelConfig channel;
    std::optional<std::string> trace_path;
    std::size_t agents = 0;
    sim::Policy policy = sim::Policy::Bnb;
    long long cycles = 100;
    double initial_cov_scale = 1.0;
    std::optional<Vector> constant_input;
    std::optional<std::string> csv_path;
};

/// Parse and validate. Every violation found is listed in one
/// Error{Configuration}; JSON syntax errors carry their line and column.
/// Relative trace paths resolve against `base_dir`.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

ExperimentConfig load_config(const std::filesystem::path& path);

/// Serialize back to the JSON layout parse_config reads.
std::string to_json(const ExperimentConfig& cfg);

/// A single decision cycle read from JSON, for `ospkit schedule`:
///
/// {
///   "model": { ...as above... },
///   "cycle": {"start": number, "prior_time": number,
///             "prior_cov": [[...]] or "prior_cov_scale": number,
///             "candidates": [{"observer", "timestamp", "airtime"}],
///             "action_airtimes": [number]}
/// }
struct CycleInstance {
    SystemModel model;
    osp::CycleContext context;
};

CycleInstance parse_cycle(const std::string& text);
CycleInstance load_cycle(const std::filesystem::path& path);

/// Names accepted by make_preset.
std::vector<std::string> preset_names();

/// Throws Error{Configuration} for an unknown name.
ExperimentConfig make_preset(const std::string& name);

/// The three-state plant used by every preset.
Matrix plant_a();
Matrix plant_b();
/// Observation matrices with six observers, rows pairwise identical.
Matrix observation_c1();
Matrix observation_c2();
/// Diagonal R from a bitstring: '0' -> 1e-2, '1' -> 1.
Matrix noise_from_bits(const std::string& bits);

inline constexpr double kLowNoise = 1e-2;
inline constexpr double kHighNoise = 1.0;
inline constexpr double kDecisionPeriod = 0.01;

}  // namespace ospkit::config

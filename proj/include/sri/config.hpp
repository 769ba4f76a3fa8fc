#pragma once

#include "sri/apt.hpp"
#include "sri/dynamics.hpp"
#include "sri/engine.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace sri {

using json = nlohmann::json;

struct AptAnalysisConfig {
    double T = 2.0;
    double dt = 1e-3;
    std::vector<double> t_grid;
};

struct LimitSetAnalysisConfig {
    double tail_fraction = 0.1;
};

struct AttractorAnalysisConfig {
    std::vector<Vec> generators;
    double radius = 0.0;
    double eps = 0.0;
};

struct SupportDumpConfig {
    std::vector<Vec> x_values;
    int n_dirs = 0;  // 0 = default for the dimension
};

/// Fully describes one experiment; round-trips losslessly through JSON.
struct ExperimentConfig {
    int dim = 1;
    int n_states = 1;

    std::string drift_name;
    json drift_params;

    std::string kernel_variant;  // iterate_independent | iterate_dependent | controlled
    std::string kernel_matrix_file;
    std::vector<std::string> control_matrix_files;
    std::string policy_file;
    json kernel_params;  // iterate_dependent builtins

    double a0 = 1.0;
    double gamma = 0.9;

    std::string noise_kind = "none";  // none | bounded_iid | gaussian_md | constant (fixture)
    double noise_bound = 0.0;
    double noise_sigma = 0.0;
    std::vector<double> noise_value;

    std::string policy_kind = "least_norm";
    std::vector<double> policy_target;

    std::vector<double> x0;
    int s0 = 0;
    long n_steps = 1000;
    std::uint64_t seed = 0;
    double blowup_bound = 1e6;

    std::optional<AptAnalysisConfig> apt;
    std::optional<LimitSetAnalysisConfig> limit_set;
    std::optional<AttractorAnalysisConfig> attractor;
    std::optional<SupportDumpConfig> support_dump;

    // Directory used to resolve relative file references.
    std::filesystem::path base_dir;
};

/// Thrown on out-of-domain parameters; message names the offending field.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);
json dump_config(const ExperimentConfig& cfg);

/// FNV-1a over the canonical JSON dump.
std::uint64_t config_hash(const ExperimentConfig& cfg);

/// Instantiated experiment pieces built from a validated config.
struct Experiment {
    DriftMap drift;
    MarkovKernel kernel;
    StepSchedule schedule;
    NoiseModel noise;
    SelectionPolicy policy;
    Vec x0;
};

Experiment build_experiment(const ExperimentConfig& cfg);

/// Resolves a preset name to presets/<name>.json next to the binary's data
/// directory, the working directory, or the compiled-in source tree.
std::filesystem::path find_preset(const std::string& name);

}  // namespace sri

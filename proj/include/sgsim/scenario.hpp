#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sgsim/core_model.hpp"

namespace sgsim {

enum class Analysis {
    Trajectory,
    Transfer,
    Dephasing,
    Bounds,
    MonteCarlo,
    Wavepacket,
    Feasibility,
    Baseline,
    ModelCompare,
};

std::string_view to_string(Analysis a);
Analysis analysis_from_string(std::string_view s);

struct McSettings {
    std::size_t paths = 10000;
    std::size_t steps = 2000;
    double ihp_tilde = 1e-14;
};

struct Scenario {
    std::string name;
    std::string description;
    ProtocolConfig config;
    double noise_ihp_amplitude = 0; ///< T m^-2 Hz^-1/2
    double noise_hp_amplitude = 0;  ///< T m^-1 Hz^-1/2
    std::vector<Analysis> analyses;  ///< sorted, unique
    double sample_step = 1e-5;
    double coherence_floor = 0.1;
    double hp_tilde_assumed = 1e-6;
    double tau = 0.31;
    double omega_min = 0;
    double transfer_omega_max_over_omega2 = 20;
    std::size_t transfer_points = 2001;
    McSettings mc;
    double feasibility_bias = 1e-3;
    double transverse_gradient = 3e4;
    double baseline_separation = 1e-6;
    double wavepacket_curve_end = 0.3;
    std::size_t wavepacket_points = 301;
};

/// Field-level validation; throws ConfigError naming the field.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);
Scenario load_scenario_file(const std::filesystem::path& file);

/// FNV-1a over the canonical semantic content (name and description excluded).
std::string config_hash(const Scenario& s);

const std::vector<Scenario>& builtin_scenarios();
const Scenario& builtin_scenario(std::string_view name);

enum class OutputFormat { Csv, JsonLines };
OutputFormat format_from_string(std::string_view s);

struct RunOptions {
    std::filesystem::path out_dir = "sgsim-out";
    std::uint64_t seed = 1;
    std::optional<std::size_t> mc_paths;
    OutputFormat format = OutputFormat::Csv;
    bool tolerance_report = false;
    unsigned threads = 0;
    std::string tool_version = "dev";
};

struct RunReport {
    nlohmann::json report;   ///< deterministic for a fixed scenario and seed
    nlohmann::json timings;  ///< wall-clock, kept apart from report
    std::vector<std::filesystem::path> files;
    std::vector<std::string> violations; ///< physics-invariant failures
};

/// Runs every requested analysis and writes its tables plus report.json.
/// Throws IoError if the output directory cannot be written.
RunReport run_scenario(const Scenario& s, const RunOptions& opts);

/// Parses "a:b:n" (inclusive, linear) or "v1,v2,..."; each number may carry a "pi" suffix.
std::vector<double> parse_grid(std::string_view grid);

/// Names accepted by sweep.
const std::vector<std::string>& sweepable_parameters();

struct SweepReport {
    nlohmann::json summary;
    std::vector<RunReport> points;
};

SweepReport sweep(const std::string& parameter, const std::vector<double>& grid, const Scenario& base,
                  const RunOptions& opts);

} // namespace sgsim

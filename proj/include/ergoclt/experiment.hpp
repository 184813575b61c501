#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergoclt/cylinder.hpp"

namespace ergoclt {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

enum class RunKind { Gordin, Forward, Clt, Conditions, All };

const char* to_string(RunKind k);

/// Exit codes of `run`.
enum ExitCode : int {
  kExitOk = 0,
  kExitInconsistent = 1,
  kExitConfigError = 2,
  kExitHypothesisFailed = 3,
};

struct RunSettings {
  RunKind kind = RunKind::All;
  int n = 10000;  // Birkhoff sum length for the CLT check
  std::vector<int> n_grid{10, 100, 1000, 10000};
  int samples = 4000;
  std::uint64_t seed = 12345;
  double series_tol = 1e-12;
  int series_max = 10000;
  double check_tol = 1e-10;
  int k_max = 200;
  double alpha = 1.5;
  double eps = 0.1;
  double route_tol = 1e-6;
};

struct ExperimentConfig {
  Matrix matrix;
  Sidedness sidedness = Sidedness::OneSided;
  CylinderFunction observable = CylinderFunction::constant(2, 0.0);
  std::optional<std::string> preset;
  RunSettings run;
};

struct Preset {
  std::string name;
  std::string description;
  Matrix matrix;
  Sidedness sidedness;
  CylinderFunction observable;
  RunKind kind;
};

const std::vector<Preset>& presets();
const Preset& find_preset(const std::string& name);
std::string list_presets();

/// Sectioned key-value text: [system], [matrix] (one row per line),
/// [observable], [run]. Throws Error{Config} or Error{NotStochastic}.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_text(const ExperimentConfig& cfg);
ExperimentConfig preset_config(const std::string& name);

struct RunResult {
  int exit_code = kExitOk;
  nlohmann::json report;
  std::vector<double> samples;  // empty unless a CLT check ran
};

/// Runs the requested engines. Never throws for model/observable problems;
/// those are recorded in the report and mapped to exit codes.
RunResult run_experiment(const ExperimentConfig& cfg, int workers = 0);

/// Report text exactly as written to report.json.
std::string report_text(const nlohmann::json& report);
std::string samples_csv(const std::vector<double>& samples);

/// File-level front door: reads the config, writes report.json, meta.json
/// and (for CLT runs) samples.csv into out_dir. Diagnostics go to `err`.
int run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
        std::optional<std::uint64_t> seed_override, std::optional<int> workers, std::ostream& err);

/// Writes out_dir/config.txt for the preset and runs it.
int run_preset(const std::string& name, const std::filesystem::path& out_dir,
               std::optional<std::uint64_t> seed_override, std::optional<int> workers,
               std::ostream& err);

}  // namespace ergoclt

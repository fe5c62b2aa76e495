#ifndef SHAKEN_TRAP_HARNESS_HPP
#define SHAKEN_TRAP_HARNESS_HPP

#include <iosfwd>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "shaken_trap/config.hpp"
#include "shaken_trap/thomas_fermi.hpp"

// Command-line front end: presets, config assembly, sweeps and output tables.

namespace shaken_trap {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumerical = 2, kExitIo = 3 };

using Cell = std::variant<double, long long, bool, std::string>;

/// Column-named records, written as CSV or as a JSON array of objects.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void write_csv(std::ostream& os) const;
  nlohmann::json to_json() const;
  void write(std::ostream& os, const std::string& format) const;
};

/// Shortest text that survives a round trip: 17 significant digits, '.' decimal.
std::string format_number(double v);

enum class SweepScale { Linear, Log };

struct SweepSpec {
  std::string parameter;  // dotted config path
  SweepScale scale = SweepScale::Log;
  double lo = 0.0;
  double hi = 0.0;
  int n = 2;

  /// Throws ConfigError on lo >= hi, n < 2 or a non-positive log bound.
  std::vector<double> values() const;
};

/// Parses "lo:hi:n".
SweepSpec parse_sweep_range(const std::string& text, std::string parameter, SweepScale scale);

/// Embedded preset documents: fig2-left, fig2-right, fig2-calibrated,
/// fig3-default, lambshift-sec2.
std::optional<nlohmann::json> preset_document(const std::string& name);
std::vector<std::string> preset_names();

/// SHAKEN_TRAP_DRIVE__AMPLITUDE_M=0.02 sets drive.amplitude_m. Values are read
/// as JSON when they parse, as strings otherwise.
void apply_env_overrides(nlohmann::json& doc, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> current_environment();

/// Sets a dotted path, creating intermediate objects.
void set_path(nlohmann::json& doc, const std::string& dotted, const nlohmann::json& value);
bool has_path(const nlohmann::json& doc, const std::string& dotted);

/// Hex SHA-256 of the canonical (sorted keys, normalized numbers) dump.
std::string canonical_hash(const nlohmann::json& doc);

/// Manifest hash: the validated config in document form plus the run parameters.
std::string config_hash(const ExperimentConfig& cfg, const nlohmann::json& run_params);

// Table builders behind the subcommands.

/// a_m, omega_rad_s, power_w over the product of the two lists.
Table power_table(const ExperimentConfig& cfg, const std::vector<double>& amplitudes_m,
                  const std::vector<double>& frequencies_hz);

/// a_mm, power_w for the ensemble-averaged power.
Table emit_fig3(const ExperimentConfig& cfg, const std::vector<double>& amplitudes_m);

Table lambshift_table(const ExperimentConfig& cfg, double n_atoms, double omega_hz, double length_m);

struct PsdRequest {
  double omega_min;
  double omega_max;
  int omega_points;
  int realizations;
  std::uint64_t seed;
};

Table psd_table(const ExperimentConfig& cfg, const PsdRequest& req);

Table tf_ratio_table(const DensityTrace& trace);

/// Probe position and chemical potential that make the N0 = 1000 trace peak at
/// exactly `target` above one, and what the same probe predicts at N0 = 1e6.
struct ProbeCalibration {
  double probe_z;
  double mu_small;
  double peak_small;
  double peak_large_predicted;
  double n_small;
  double n_large;
  double scaling_exponent;
  static constexpr double kReportedSmall = 0.005;
  static constexpr double kReportedLarge = 0.5;
};

ProbeCalibration calibrate_probe(const ExperimentConfig& cfg, double target, double t_end, double dt);

enum class SweepTarget { Power, TfRatio, Lambshift };

struct TfRatioRequest {
  std::optional<double> probe_z;
  MuModel mu_model;
  std::optional<double> t_end;
  std::optional<double> dt;
};

/// Default probe: half the unperturbed TF radius.
double default_probe_z(const ExperimentConfig& cfg, const MuModel& mu);

/// One row per sweep value, computed on up to `jobs` threads, ordered by value.
/// Throws ConfigError(UnknownParameterPath) when the path is not a config key.
Table sweep_table(const nlohmann::json& base_doc, const SweepSpec& spec, SweepTarget target,
                  const TfRatioRequest& tf, int jobs);

/// Entry point of the executable. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shaken_trap

#endif  // SHAKEN_TRAP_HARNESS_HPP

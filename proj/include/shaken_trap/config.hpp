#ifndef SHAKEN_TRAP_CONFIG_HPP
#define SHAKEN_TRAP_CONFIG_HPP

#include <json.hpp>
#include <optional>
#include <string>

#include "shaken_trap/drive.hpp"
#include "shaken_trap/units.hpp"

namespace shaken_trap {

struct SolverParams {
  int grid_points = 1024;
  std::optional<double> domain_halfwidth;  // m; chosen from the cloud size when absent
  double dt = 1e-6;                        // s
  double t_end = 0.02;                     // s
  double imag_time_tol = 1e-13;            // relative energy change per step
  int max_imag_steps = 400000;

  bool operator==(const SolverParams&) const = default;
};

struct OutputSpec {
  std::string format = "csv";
  std::string path;

  bool operator==(const OutputSpec&) const = default;
};

/// Validated experiment description. Frequencies are angular from here on.
struct ExperimentConfig {
  AtomSpecies species;
  TrapConfig trap;
  DriveSpec drive;
  double n_atoms = 1.0;
  // Unset means "each module applies its own default".
  std::optional<MassConvention> mass_convention;
  SolverParams solver;
  OutputSpec output;

  bool operator==(const ExperimentConfig&) const = default;

  MassConvention mass_convention_or(MassConvention fallback) const {
    return mass_convention.value_or(fallback);
  }
  double perturbation_mass_or(MassConvention fallback) const {
    return perturbation_mass(mass_convention_or(fallback), species.atomic_mass, n_atoms);
  }
};

/// Parses the JSON configuration document, applying defaults. Collects every
/// problem before throwing a single ConfigError.
ExperimentConfig validate_config(const nlohmann::json& raw);

/// Inverse of validate_config: emits the document form (Hz, metres, keys as in
/// the file format) with sorted keys.
nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace shaken_trap

#endif  // SHAKEN_TRAP_CONFIG_HPP

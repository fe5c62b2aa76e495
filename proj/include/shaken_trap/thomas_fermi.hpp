#ifndef SHAKEN_TRAP_THOMAS_FERMI_HPP
#define SHAKEN_TRAP_THOMAS_FERMI_HPP

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "shaken_trap/config.hpp"

// Thomas-Fermi response of the condensate to the shaken trap. The harmonic
// terms use the atomic mass; the drive term uses whatever mass the configured
// convention selects (total condensate mass by default here).

namespace shaken_trap {

struct TotalPotentialParams {
  TrapConfig trap;
  DriveSpec drive;
  double atomic_mass;        // kg, harmonic terms
  double perturbation_mass;  // kg, m in m A(t) z
};

/// 1/2 m_a (wx^2 x^2 + wy^2 y^2 + wz^2 z^2) + m A(t) z
double total_potential(const TotalPotentialParams& p, double x, double y, double z, double t);

/// g = 4 pi hbar^2 a_s / m
double coupling_constant(const AtomSpecies& species, double mass);

enum class MuModelKind { FractionOfTc, StandardTf, Explicit };

/// How the chemical potential is closed.
///   FractionOfTc: mu = 0.3 k_B T_c
///   StandardTf:        mu = (hbar wbar / 2) (15 N a_s / abar)^(2/5)
///   Explicit:          mu = value_j
struct MuModel {
  MuModelKind kind = MuModelKind::StandardTf;
  std::optional<double> value_j;
  std::optional<double> critical_temperature;

  static MuModel explicit_value(double mu) { return {MuModelKind::Explicit, mu, std::nullopt}; }
  static MuModel from_tc(double tc) { return {MuModelKind::FractionOfTc, std::nullopt, tc}; }
  static MuModel standard() { return {}; }
};

/// mu(0) / k_B T_c for the fraction-of-T_c closure.
inline constexpr double kMuOverKTc = 0.3;

const char* to_string(MuModelKind k);
bool parse_mu_model(const std::string& text, MuModelKind& out);

/// Throws ConfigError (MissingField) when the model lacks its parameter.
double chemical_potential(const MuModel& model, double n_atoms, const TrapConfig& trap, const AtomSpecies& species);

struct TfDensity {
  double density;  // 1/m^3
  bool beyond_tf;  // mu < V: the formula would go negative
};

/// n = (mu - V)/g inside the cloud, 0 on and outside its edge. Only a strictly
/// negative mu - V is flagged as beyond Thomas-Fermi.
TfDensity tf_density(double mu, double potential, double g);

struct DensityTrace {
  std::vector<double> times;
  std::vector<double> ratio;  // 0 where beyond_tf
  std::vector<bool> beyond_tf;

  /// max |R - 1| over entries still inside the TF regime.
  double peak_deviation() const;
};

/// Potential parameters for this module, total-condensate mass by default.
TotalPotentialParams tf_potential_params(const ExperimentConfig& cfg);

/// R(t_k) = n_TF(z0, t_k) / n_TF(z0, 0) on x = y = 0 for t_k = k dt <= t_end.
/// Throws ProbeOutsideCloud if the probe is outside the unperturbed cloud.
DensityTrace density_ratio_trace(const ExperimentConfig& cfg, double probe_z, const MuModel& mu_model,
                                 double t_end, double dt);

/// n_TF along z (x = y = 0) at time t.
Eigen::VectorXd tf_profile(const ExperimentConfig& cfg, const MuModel& mu_model, double t,
                           const Eigen::VectorXd& z_grid);

/// Axial TF radius sqrt(2 mu / m_a wz^2) of the unperturbed cloud.
double tf_radius_z(double mu, const AtomSpecies& species, const TrapConfig& trap);

}  // namespace shaken_trap

#endif  // SHAKEN_TRAP_THOMAS_FERMI_HPP

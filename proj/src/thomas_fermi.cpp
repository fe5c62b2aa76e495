#include "shaken_trap/thomas_fermi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace shaken_trap {

double total_potential(const TotalPotentialParams& p, double x, double y, double z, double t) {
  const double harmonic = 0.5 * p.atomic_mass *
                          (p.trap.omega_x * p.trap.omega_x * x * x + p.trap.omega_y * p.trap.omega_y * y * y +
                           p.trap.omega_z * p.trap.omega_z * z * z);
  return harmonic + perturbation_potential(p.perturbation_mass, p.drive, z, t);
}

double coupling_constant(const AtomSpecies& species, double mass) {
  return 4.0 * std::numbers::pi * kHbar * kHbar * species.scattering_length / mass;
}

const char* to_string(MuModelKind k) {
  switch (k) {
    case MuModelKind::FractionOfTc: return "paper_prescription";
    case MuModelKind::StandardTf: return "standard_tf";
    case MuModelKind::Explicit: return "explicit";
  }
  return "?";
}

bool parse_mu_model(const std::string& text, MuModelKind& out) {
  for (auto k : {MuModelKind::FractionOfTc, MuModelKind::StandardTf, MuModelKind::Explicit}) {
    if (text == to_string(k)) {
      out = k;
      return true;
    }
  }
  return false;
}

double chemical_potential(const MuModel& model, double n_atoms, const TrapConfig& trap, const AtomSpecies& species) {
  switch (model.kind) {
    case MuModelKind::Explicit:
      if (!model.value_j) throw ConfigError(ConfigIssueKind::MissingField, "mu_model.value_j");
      if (!(*model.value_j > 0.0))
        throw ConfigError(ConfigIssueKind::InvalidValue, "mu_model.value_j", "must be > 0");
      return *model.value_j;
    case MuModelKind::FractionOfTc:
      if (!model.critical_temperature) throw ConfigError(ConfigIssueKind::MissingField, "mu_model.T_c");
      return kMuOverKTc * kBoltzmann * *model.critical_temperature;
    case MuModelKind::StandardTf: {
      const double wbar = std::cbrt(trap.omega_x * trap.omega_y * trap.omega_z);
      const double abar = std::sqrt(kHbar / (species.atomic_mass * wbar));
      return 0.5 * kHbar * wbar * std::pow(15.0 * n_atoms * species.scattering_length / abar, 0.4);
    }
  }
  return 0.0;
}

TfDensity tf_density(double mu, double potential, double g) {
  if (mu > potential) return {(mu - potential) / g, false};
  return {0.0, mu < potential};
}

double DensityTrace::peak_deviation() const {
  double peak = 0.0;
  for (std::size_t k = 0; k < ratio.size(); ++k)
    if (!beyond_tf[k]) peak = std::max(peak, std::abs(ratio[k] - 1.0));
  return peak;
}

TotalPotentialParams tf_potential_params(const ExperimentConfig& cfg) {
  return {cfg.trap, cfg.drive, cfg.species.atomic_mass, cfg.perturbation_mass_or(MassConvention::TotalCondensate)};
}

DensityTrace density_ratio_trace(const ExperimentConfig& cfg, double probe_z, const MuModel& mu_model,
                                 double t_end, double dt) {
  if (!(dt > 0.0)) throw ConfigError(ConfigIssueKind::InvalidValue, "dt_s", "must be > 0");
  if (dt > std::numbers::pi / (5.0 * cfg.drive.angular_frequency) * (1.0 + 1e-12))
    throw NumericalError(NumericalError::Kind::UnderResolved, "dt does not resolve the drive period");

  const auto params = tf_potential_params(cfg);
  const double mu = chemical_potential(mu_model, cfg.n_atoms, cfg.trap, cfg.species);
  const double g = coupling_constant(cfg.species, cfg.species.atomic_mass);
  const auto reference = tf_density(mu, total_potential(params, 0.0, 0.0, probe_z, 0.0), g);
  if (!(reference.density > 0.0))
    throw NumericalError(NumericalError::Kind::ProbeOutsideCloud,
                         "probe z = " + std::to_string(probe_z) + " m lies outside the unperturbed cloud");

  const auto steps = static_cast<std::size_t>(std::floor(t_end / dt * (1.0 + 1e-12)));
  DensityTrace trace;
  trace.times.reserve(steps + 1);
  trace.ratio.reserve(steps + 1);
  trace.beyond_tf.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const auto n = tf_density(mu, total_potential(params, 0.0, 0.0, probe_z, t), g);
    trace.times.push_back(t);
    trace.beyond_tf.push_back(n.beyond_tf);
    trace.ratio.push_back(n.beyond_tf ? 0.0 : n.density / reference.density);
  }
  return trace;
}

Eigen::VectorXd tf_profile(const ExperimentConfig& cfg, const MuModel& mu_model, double t,
                           const Eigen::VectorXd& z_grid) {
  const auto params = tf_potential_params(cfg);
  const double mu = chemical_potential(mu_model, cfg.n_atoms, cfg.trap, cfg.species);
  const double g = coupling_constant(cfg.species, cfg.species.atomic_mass);
  return z_grid.unaryExpr([&](double z) { return tf_density(mu, total_potential(params, 0.0, 0.0, z, t), g).density; });
}

double tf_radius_z(double mu, const AtomSpecies& species, const TrapConfig& trap) {
  return std::sqrt(2.0 * mu / (species.atomic_mass * trap.omega_z * trap.omega_z));
}

}  // namespace shaken_trap

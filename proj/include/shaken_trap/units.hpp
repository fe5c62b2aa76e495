#ifndef SHAKEN_TRAP_UNITS_HPP
#define SHAKEN_TRAP_UNITS_HPP

#include <numbers>
#include <string>

// Everything in this library is SI. Frequencies given in Hz are converted to
// angular frequency once, at the configuration boundary.

namespace shaken_trap {

struct PhysicalConstants {
  double hbar;         // J s
  double k_boltzmann;  // J / K
  double planck_h;     // J s, always 2 pi hbar
  double planck_mass;  // kg
};

inline constexpr double kHbar = 1.054571817e-34;
inline constexpr double kBoltzmann = 1.380649e-23;
inline constexpr double kPlanckH = 2.0 * std::numbers::pi * kHbar;
inline constexpr double kPlanckMass = 2.176434e-8;
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;

inline constexpr PhysicalConstants kConstants{kHbar, kBoltzmann, kPlanckH, kPlanckMass};

inline constexpr double angular_from_hz(double f) { return 2.0 * std::numbers::pi * f; }
inline constexpr double hz_from_angular(double omega) { return omega / (2.0 * std::numbers::pi); }

struct AtomSpecies {
  std::string name;
  double atomic_mass;        // kg
  double scattering_length;  // m, positive is repulsive

  bool operator==(const AtomSpecies&) const = default;
};

/// Rubidium-87 with a_s = 5.28 nm. The 5 nm variant is only reachable through
/// an explicit override.
AtomSpecies species_rb87();

/// Small built-in table; returns false when the name is unknown.
bool lookup_species(const std::string& name, AtomSpecies& out);

/// Harmonic trap angular frequencies (rad/s).
struct TrapConfig {
  double omega_x;
  double omega_y;
  double omega_z;

  bool operator==(const TrapConfig&) const = default;
};

/// Which mass multiplies A(t) z in the drive term.
enum class MassConvention { PerAtom, TotalCondensate };

const char* to_string(MassConvention c);
bool parse_mass_convention(const std::string& text, MassConvention& out);

/// Resolves the drive-term mass: m_a or N0 m_a.
inline double perturbation_mass(MassConvention c, double atomic_mass, double n_atoms) {
  return c == MassConvention::PerAtom ? atomic_mass : n_atoms * atomic_mass;
}

}  // namespace shaken_trap

#endif  // SHAKEN_TRAP_UNITS_HPP

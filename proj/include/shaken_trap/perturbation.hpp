#ifndef SHAKEN_TRAP_PERTURBATION_HPP
#define SHAKEN_TRAP_PERTURBATION_HPP

#include <complex>
#include <vector>

#include "shaken_trap/drive.hpp"
#include "shaken_trap/spectral_density.hpp"

// First-order perturbation theory for a 1D harmonic oscillator driven by the
// inertial potential V = m A(t) x.

namespace shaken_trap {

struct OscillatorState {
  int index;
  double omega;  // rad/s
  double mass;   // kg
};

struct TransitionResult {
  static constexpr double kValidityThreshold = 0.1;

  int from_index;
  int to_index;
  std::complex<double> amplitude;
  double probability;
  bool valid_first_order;
};

/// A rate or a power that may be the weight of a delta line in the trap
/// frequency rather than an ordinary number.
struct Distributional {
  double value;
  bool is_distributional;
};

using TransitionRate = Distributional;

struct PowerResult {
  double power;  // W, or W per unit delta(omega - Omega) when distributional
  bool is_distributional;
};

/// <n|x|i> = sqrt(hbar / 2 m omega) (sqrt(i+1) d_{n,i+1} + sqrt(i) d_{n,i-1}).
double position_matrix_element(int i, int n, double mass, double omega);

/// c1 = -(i m / hbar) <n|x|i> F_t(omega_ni) using the first round(t/dt)+1
/// samples of `signal`.
std::complex<double> first_order_coeff(int i, int n, double mass, double omega, const SampledSignal& signal,
                                       double t);

/// |c1|^2 together with the first-order validity flag.
TransitionResult first_order_transition(int i, int n, double mass, double omega, const SampledSignal& signal,
                                        double t);

/// T = m S(omega_ni) / (2 hbar omega) * [(i+1) d_{n,i+1} + i d_{n,i-1}].
/// Throws SpectralValueUnavailable when S cannot be evaluated at omega_ni.
TransitionRate transition_rate(int i, int n, double mass, double omega, const SpectralDensity& s);

/// Net power hbar omega (T_up - T_down) absorbed from state i. Reduces to
/// m S(omega) / 2 for an even spectrum, for every i.
PowerResult absorbed_power(double mass, double omega, const SpectralDensity& s, int initial_index = 0);

/// pi m a^2 Omega^3 / 4. Cross-checked against the symbolic average below.
double ensemble_averaged_power(double mass, double amplitude, double drive_omega);

/// Integral of the resonant line power against the uniform density 1/Omega on
/// [Omega/2, 3 Omega/2], done on the delta line directly.
double ensemble_average_symbolic(double mass, double amplitude, double drive_omega);

/// Level populations of the exactly solvable forced oscillator started in |0>.
/// The list is long enough that its sum is within 1e-12 of one.
struct DisplacedOscillator {
  std::complex<double> alpha;
  std::vector<double> populations;
};

DisplacedOscillator exact_displaced_oscillator(double mass, double omega, const SampledSignal& signal, double t);

struct EnergyScaleReport {
  double absorbed_energy;  // J
  double kbt;              // J
  double hf;               // J
  double absorbed_over_kbt;
  double absorbed_over_hf;
  double kbt_over_hf;
};

EnergyScaleReport energy_scale_report(double power, double duration, double temperature, double trap_freq_hz);

struct LambShift {
  double delta_v;  // J
  double ratio;    // delta_v / (hbar omega)
};

/// <dV> = 16/(27 pi) m^3 / m_P^2 omega^2 L^2 with m = n_atoms * atomic_mass.
LambShift gravitational_lamb_shift(double atomic_mass, double n_atoms, double omega, double length);

/// Trap length L for which the ratio above equals `target_ratio`.
double lamb_shift_length_for_ratio(double atomic_mass, double n_atoms, double omega, double target_ratio);

}  // namespace shaken_trap

#endif  // SHAKEN_TRAP_PERTURBATION_HPP

#include "shaken_trap/perturbation.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "shaken_trap/units.hpp"

namespace shaken_trap {

namespace {

using namespace std::complex_literals;

double oscillator_length_scale(double mass, double omega) { return std::sqrt(kHbar / (2.0 * mass * omega)); }

Eigen::Index samples_up_to(const SampledSignal& signal, double t) {
  const auto last = static_cast<Eigen::Index>(std::llround(t / signal.dt));
  if (last < 0 || last >= signal.size())
    throw std::out_of_range("time " + std::to_string(t) + " s lies outside the sampled signal");
  return last + 1;
}

// Composite Simpson on [0, (n-1) dt], closing an odd panel count with the
// 3/8 rule. Kept separate from the trapezoid used by windowed_fourier.
std::complex<double> simpson_fourier(const Eigen::VectorXd& f, Eigen::Index n, double dt, double omega) {
  auto g = [&](Eigen::Index k) {
    const double arg = omega * static_cast<double>(k) * dt;
    return f(k) * std::complex<double>(std::cos(arg), std::sin(arg));
  };
  const Eigen::Index panels = n - 1;
  if (panels < 1) return {};
  if (panels == 1) return 0.5 * dt * (g(0) + g(1));
  Eigen::Index simpson_end = panels % 2 == 0 ? panels : panels - 3;
  std::complex<double> sum{};
  if (simpson_end >= 2) {
    std::complex<double> inner{};
    for (Eigen::Index k = 1; k < simpson_end; ++k) inner += (k % 2 == 1 ? 4.0 : 2.0) * g(k);
    sum += dt / 3.0 * (g(0) + inner + g(simpson_end));
  } else {
    simpson_end = 0;
  }
  if (simpson_end < panels) {
    const Eigen::Index k = simpson_end;
    sum += 3.0 * dt / 8.0 * (g(k) + 3.0 * g(k + 1) + 3.0 * g(k + 2) + g(k + 3));
  }
  return sum;
}

}  // namespace

double position_matrix_element(int i, int n, double mass, double omega) {
  if (i < 0 || n < 0) return 0.0;
  const double scale = oscillator_length_scale(mass, omega);
  if (n == i + 1) return scale * std::sqrt(static_cast<double>(i + 1));
  if (n == i - 1) return scale * std::sqrt(static_cast<double>(i));
  return 0.0;
}

std::complex<double> first_order_coeff(int i, int n, double mass, double omega, const SampledSignal& signal,
                                       double t) {
  const double x_ni = position_matrix_element(i, n, mass, omega);
  if (x_ni == 0.0) return {};
  const Eigen::Index count = samples_up_to(signal, t);
  const double omega_ni = static_cast<double>(n - i) * omega;
  const auto transform = windowed_fourier(signal.samples.head(count), signal.dt, omega_ni);
  return -1i * (mass / kHbar) * x_ni * transform;
}

TransitionResult first_order_transition(int i, int n, double mass, double omega, const SampledSignal& signal,
                                        double t) {
  const auto c = first_order_coeff(i, n, mass, omega, signal, t);
  const double p = std::norm(c);
  return {i, n, c, p, p <= TransitionResult::kValidityThreshold};
}

TransitionRate transition_rate(int i, int n, double mass, double omega, const SpectralDensity& s) {
  double bracket = 0.0;
  if (i >= 0 && n == i + 1)
    bracket = static_cast<double>(i + 1);
  else if (i >= 1 && n == i - 1)
    bracket = static_cast<double>(i);
  else
    return {0.0, false};
  const double omega_ni = static_cast<double>(n - i) * omega;
  const auto sv = s.evaluate(omega_ni);
  if (!sv)
    throw NumericalError(NumericalError::Kind::SpectralValueUnavailable,
                         "spectral density unavailable at omega = " + std::to_string(omega_ni));
  return {mass * sv->value / (2.0 * kHbar * omega) * bracket, sv->is_line};
}

PowerResult absorbed_power(double mass, double omega, const SpectralDensity& s, int initial_index) {
  const auto up = s.evaluate(omega);
  const auto down = s.evaluate(-omega);
  if (!up || !down)
    throw NumericalError(NumericalError::Kind::SpectralValueUnavailable,
                         "spectral density unavailable at +-" + std::to_string(omega));
  const bool line = up->is_line || down->is_line;
  // a line on one side only: drop the finite density on the other
  const double s_up = (line && !up->is_line) ? 0.0 : up->value;
  const double s_down = (line && !down->is_line) ? 0.0 : down->value;
  // hbar omega [(i+1) T(S_up) - i T(S_down)], regrouped
  const double i = static_cast<double>(initial_index);
  const double power = 0.5 * mass * (s_up + i * (s_up - s_down));
  return {power, line};
}

double ensemble_averaged_power(double mass, double amplitude, double drive_omega) {
  return std::numbers::pi * mass * amplitude * amplitude * drive_omega * drive_omega * drive_omega / 4.0;
}

double ensemble_average_symbolic(double mass, double amplitude, double drive_omega) {
  const double a0 = amplitude * drive_omega * drive_omega;
  const auto spectrum = analytic_psd_sine(a0, drive_omega);
  // the trap frequency is integrated over; only omega = Omega carries a line
  const auto line = absorbed_power(mass, drive_omega, spectrum);
  const double lo = drive_omega - drive_omega / 2.0;
  const double hi = drive_omega + drive_omega / 2.0;
  const double density = 1.0 / drive_omega;
  if (!line.is_distributional || drive_omega < lo || drive_omega > hi) return 0.0;
  return line.power * density;
}

DisplacedOscillator exact_displaced_oscillator(double mass, double omega, const SampledSignal& signal, double t) {
  const Eigen::Index count = samples_up_to(signal, t);
  const auto integral = simpson_fourier(signal.samples, count, signal.dt, omega);
  const std::complex<double> alpha = -1i / kHbar * oscillator_length_scale(mass, omega) * mass * integral;

  const double x = std::norm(alpha);
  DisplacedOscillator out{alpha, {}};
  if (x == 0.0) {
    out.populations = {1.0};
    return out;
  }
  for (int n = 0;; ++n) {
    const double p = std::exp(-x + n * std::log(x) - std::lgamma(n + 1.0));
    out.populations.push_back(p);
    const double next = n + 1.0;
    if (next > x) {
      const double r = x / next;
      // geometric bound on the remaining Poisson tail
      if (p * r / (1.0 - r) < 1e-14) break;
    }
  }
  return out;
}

EnergyScaleReport energy_scale_report(double power, double duration, double temperature, double trap_freq_hz) {
  EnergyScaleReport r{};
  r.absorbed_energy = power * duration;
  r.kbt = kBoltzmann * temperature;
  r.hf = kPlanckH * trap_freq_hz;
  r.absorbed_over_kbt = r.absorbed_energy / r.kbt;
  r.absorbed_over_hf = r.absorbed_energy / r.hf;
  r.kbt_over_hf = r.kbt / r.hf;
  return r;
}

LambShift gravitational_lamb_shift(double atomic_mass, double n_atoms, double omega, double length) {
  const double m = n_atoms * atomic_mass;
  const double prefactor = 16.0 / (27.0 * std::numbers::pi);
  const double delta_v = prefactor * (m * m * m) / (kPlanckMass * kPlanckMass) * omega * omega * length * length;
  return {delta_v, delta_v / (kHbar * omega)};
}

double lamb_shift_length_for_ratio(double atomic_mass, double n_atoms, double omega, double target_ratio) {
  const double unit = gravitational_lamb_shift(atomic_mass, n_atoms, omega, 1.0).ratio;
  return std::sqrt(target_ratio / unit);
}

}  // namespace shaken_trap

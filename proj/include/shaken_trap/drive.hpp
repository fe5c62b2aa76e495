#ifndef SHAKEN_TRAP_DRIVE_HPP
#define SHAKEN_TRAP_DRIVE_HPP

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "shaken_trap/errors.hpp"
#include "shaken_trap/spectral_density.hpp"

namespace shaken_trap {

enum class NoiseKind { White, BandLimited };

/// Stationary Gaussian acceleration noise. `accel_psd_level` is the two-sided
/// density S in (m/s^2)^2 s, normalized so that <A^2> = (1/2pi) * integral S dw.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::White;
  double accel_psd_level = 0.0;
  double band_lo = 0.0;  // rad/s, band_limited only
  double band_hi = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const NoiseSpec&) const = default;
};

/// Vertical shaking z(t) = a sin(Omega t + phase), optionally with noise on top
/// of the acceleration.
struct DriveSpec {
  double amplitude = 0.0;          // m
  double angular_frequency = 1.0;  // rad/s
  double phase = 0.0;              // rad
  std::optional<NoiseSpec> noise;

  bool operator==(const DriveSpec&) const = default;

  /// Peak acceleration a Omega^2.
  double peak_acceleration() const { return amplitude * angular_frequency * angular_frequency; }
};

/// Uniformly sampled real signal, t_k = k dt.
template <typename Scalar>
struct BasicSampledSignal {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Scalar dt{};
  Vector samples;

  Eigen::Index size() const { return samples.size(); }
  Scalar duration() const { return dt * static_cast<Scalar>(samples.size() - 1); }
};

using SampledSignal = BasicSampledSignal<double>;

inline double displacement(const DriveSpec& d, double t) {
  return d.amplitude * std::sin(d.angular_frequency * t + d.phase);
}

/// Deterministic part of A(t) = -Omega^2 a sin(Omega t + phase). Noise only
/// exists as a sampled realization, see synth_signal.
inline double acceleration(const DriveSpec& d, double t) {
  return -d.angular_frequency * d.angular_frequency * displacement(d, t);
}

/// V = m A(t) z, the inertial potential of the shaken frame.
inline double perturbation_potential(double mass, const DriveSpec& d, double z, double t) {
  return mass * acceleration(d, t) * z;
}

/// Samples A(t_k) for k < n plus one seeded noise realization. Throws
/// UnderResolved when dt > pi / (5 Omega).
SampledSignal synth_signal(const DriveSpec& drive, double dt, Eigen::Index n);

/// Trapezoidal approximation of integral_0^t exp(+i omega t') f(t') dt' with
/// t = (N - 1) dt. Accepts any Eigen vector expression, so linear combinations
/// of signals can be transformed without a temporary.
template <typename Derived>
std::complex<typename Derived::Scalar> windowed_fourier(const Eigen::MatrixBase<Derived>& samples,
                                                        typename Derived::Scalar dt,
                                                        typename Derived::Scalar omega) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = samples.size();
  if (n < 2) return {};
  // negative frequencies via the conjugate phase
  const Scalar w = std::abs(omega);
  const bool flip = omega < Scalar(0);
  Scalar re = 0, im = 0, re_c = 0, im_c = 0;
  auto add = [](Scalar& sum, Scalar& comp, Scalar v) {
    const Scalar t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  };
  for (Eigen::Index k = 0; k < n; ++k) {
    const Scalar weight = (k == 0 || k == n - 1) ? Scalar(0.5) : Scalar(1);
    const Scalar arg = w * (static_cast<Scalar>(k) * dt);
    const Scalar f = weight * samples(k);
    add(re, re_c, f * std::cos(arg));
    add(im, im_c, f * std::sin(arg));
  }
  const std::complex<Scalar> out{(re + re_c) * dt, (im + im_c) * dt};
  return flip ? std::conj(out) : out;
}

inline std::complex<double> windowed_fourier(const SampledSignal& s, double omega) {
  return windowed_fourier(s.samples, s.dt, omega);
}

/// S_t(w) = (1/t) <|F_t(w)|^2> averaged over realizations, grid only.
/// Throws LengthMismatch for unequal lengths or sampling steps.
SpectralDensity psd_estimate(const std::vector<SampledSignal>& realizations,
                             const Eigen::VectorXd& omega_grid);

/// Two delta lines of weight pi A0^2 / 2 at +-Omega.
SpectralDensity analytic_psd_sine(double a0, double omega);

}  // namespace shaken_trap

#endif  // SHAKEN_TRAP_DRIVE_HPP

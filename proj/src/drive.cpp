#include "shaken_trap/drive.hpp"

#include <numbers>
#include <random>
#include <string>
#include <unsupported/Eigen/FFT>

namespace shaken_trap {

namespace {

// One Gaussian realization with two-sided density `level` inside the band,
// built bin by bin in frequency space and brought back with an inverse FFT.
Eigen::VectorXd synth_noise(const NoiseSpec& spec, double dt, Eigen::Index n) {
  const double nyquist = std::numbers::pi / dt;
  double lo = 0.0, hi = nyquist;
  if (spec.kind == NoiseKind::BandLimited) {
    lo = spec.band_lo;
    hi = spec.band_hi;
  }
  const double bin_var = static_cast<double>(n) * spec.accel_psd_level / dt;
  const double dw = 2.0 * std::numbers::pi / (static_cast<double>(n) * dt);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::VectorXcd bins = Eigen::VectorXcd::Zero(n);
  auto in_band = [&](Eigen::Index k) {
    const double w = dw * static_cast<double>(k);
    return w >= lo && w <= hi;
  };
  // DC and (for even n) Nyquist are real
  const double g0 = normal(rng);
  if (in_band(0)) bins(0) = std::sqrt(bin_var) * g0;
  const Eigen::Index half = (n + 1) / 2;
  for (Eigen::Index k = 1; k < half; ++k) {
    const double re = normal(rng), im = normal(rng);
    if (!in_band(k)) continue;
    const std::complex<double> x = std::sqrt(0.5 * bin_var) * std::complex<double>(re, im);
    bins(k) = x;
    bins(n - k) = std::conj(x);
  }
  if (n % 2 == 0) {
    const double g = normal(rng);
    if (in_band(n / 2)) bins(n / 2) = std::sqrt(bin_var) * g;
  }

  Eigen::FFT<double> fft;
  Eigen::VectorXcd time(n);
  fft.inv(time, bins);
  return time.real();
}

}  // namespace

SampledSignal synth_signal(const DriveSpec& drive, double dt, Eigen::Index n) {
  if (!(dt > 0.0) || n < 2)
    throw NumericalError(NumericalError::Kind::UnderResolved, "synth_signal needs dt > 0 and n >= 2");
  const double limit = std::numbers::pi / (5.0 * drive.angular_frequency);
  if (dt > limit * (1.0 + 1e-12))
    throw NumericalError(NumericalError::Kind::UnderResolved,
                         "dt = " + std::to_string(dt) + " s does not resolve the drive (need <= " +
                             std::to_string(limit) + " s)");
  SampledSignal out{dt, Eigen::VectorXd(n)};
  for (Eigen::Index k = 0; k < n; ++k) out.samples(k) = acceleration(drive, static_cast<double>(k) * dt);
  if (drive.noise && drive.noise->accel_psd_level > 0.0) out.samples += synth_noise(*drive.noise, dt, n);
  return out;
}

SpectralDensity psd_estimate(const std::vector<SampledSignal>& realizations,
                             const Eigen::VectorXd& omega_grid) {
  if (realizations.empty())
    throw NumericalError(NumericalError::Kind::LengthMismatch, "psd_estimate needs at least one realization");
  const auto& first = realizations.front();
  for (const auto& r : realizations)
    if (r.size() != first.size() || r.dt != first.dt)
      throw NumericalError(NumericalError::Kind::LengthMismatch, "realizations differ in length or dt");
  const double t = first.duration();
  const double count = static_cast<double>(realizations.size());

  Eigen::VectorXd s(omega_grid.size());
  for (Eigen::Index j = 0; j < omega_grid.size(); ++j) {
    // realization order is fixed, so the mean is reproducible bit for bit
    double sum = 0.0;
    for (const auto& r : realizations) sum += std::norm(windowed_fourier(r, omega_grid(j)));
    s(j) = sum / count / t;
  }
  return {omega_grid, std::move(s)};
}

SpectralDensity analytic_psd_sine(double a0, double omega) {
  const double weight = std::numbers::pi * a0 * a0 / 2.0;
  return {Eigen::VectorXd(), Eigen::VectorXd(), {{omega, weight}, {-omega, weight}}};
}

}  // namespace shaken_trap

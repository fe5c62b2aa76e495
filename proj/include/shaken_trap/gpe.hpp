#ifndef SHAKEN_TRAP_GPE_HPP
#define SHAKEN_TRAP_GPE_HPP

#include <Eigen/Core>
#include <complex>
#include <functional>
#include <iosfwd>
#include <numbers>
#include <string>
#include <unsupported/Eigen/FFT>
#include <vector>

#include "shaken_trap/config.hpp"

// Quasi-1D Gross-Pitaevskii dynamics along the shaken axis,
//   i hbar psi_t = -hbar^2/(2 m_a) psi_zz + [1/2 m_a wz^2 z^2 + m A(t) z] psi + g1d |psi|^2 psi,
// normalized to sum |psi|^2 dz = N0, on a periodic grid.

namespace shaken_trap {

template <typename Scalar>
using RealVectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using ComplexVectorX = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

/// Uniform periodic grid on [-halfwidth, halfwidth).
template <typename Scalar>
struct BasicGrid1D {
  Eigen::Index n_points = 0;
  Scalar halfwidth = 0;

  /// Throws ConfigError unless n_points is a power of two >= 64 and halfwidth > 0.
  static BasicGrid1D make(Eigen::Index n_points, Scalar halfwidth) {
    if (n_points < 64 || (n_points & (n_points - 1)) != 0)
      throw ConfigError(ConfigIssueKind::InvalidValue, "solver.grid_points", "must be a power of two >= 64");
    if (!(halfwidth > 0))
      throw ConfigError(ConfigIssueKind::InvalidValue, "solver.domain_halfwidth_m", "must be > 0");
    return {n_points, halfwidth};
  }

  Scalar dz() const { return Scalar(2) * halfwidth / static_cast<Scalar>(n_points); }

  RealVectorX<Scalar> z() const {
    RealVectorX<Scalar> out(n_points);
    for (Eigen::Index j = 0; j < n_points; ++j) out(j) = dz() * static_cast<Scalar>(j - n_points / 2);
    return out;
  }

  /// Angular wavenumbers in FFT order.
  RealVectorX<Scalar> k() const {
    RealVectorX<Scalar> out(n_points);
    const Scalar dk = std::numbers::pi_v<Scalar> / halfwidth;
    for (Eigen::Index j = 0; j < n_points; ++j) {
      const Eigen::Index m = j < n_points / 2 ? j : j - n_points;
      out(j) = dk * static_cast<Scalar>(m);
    }
    return out;
  }
};

template <typename Scalar>
struct BasicWaveFunction {
  BasicGrid1D<Scalar> grid;
  ComplexVectorX<Scalar> values;  // m^(-1/2)
  Scalar time = 0;

  Scalar norm() const { return values.squaredNorm() * grid.dz(); }
};

using Grid1D = BasicGrid1D<double>;
using WaveFunction = BasicWaveFunction<double>;

/// Physical parameters of the 1D equation, resolved from a configuration.
struct GpeModel {
  double atomic_mass;        // kg, kinetic and trap mass
  double omega_z;            // rad/s
  double omega_perp;         // rad/s, sqrt(wx wy)
  double g1d;                // J m
  double perturbation_mass;  // kg
  double n_atoms;
  DriveSpec drive;

  double potential(double z, double t) const {
    return 0.5 * atomic_mass * omega_z * omega_z * z * z + perturbation_potential(perturbation_mass, drive, z, t);
  }
};

/// g1d = g / (2 pi l_perp^2), l_perp = sqrt(hbar / m_a w_perp). Per-atom drive
/// mass unless the configuration says otherwise.
GpeModel gpe_model(const ExperimentConfig& cfg);

/// 1D Thomas-Fermi chemical potential ((3/4) N g1d wz sqrt(m_a/2))^(2/3).
double tf_chemical_potential_1d(const GpeModel& model);

/// Default domain halfwidth: 1.5 (cloud radius + slosh amplitude).
double default_halfwidth(const ExperimentConfig& cfg);

/// Grid from solver.grid_points and solver.domain_halfwidth_m (or the default).
Grid1D grid_for(const ExperimentConfig& cfg);

struct Observables {
  double time;          // s
  double norm;          // atoms
  double energy;        // J per atom
  double com;           // m
  double peak_density;  // 1/m
  double width;         // m
};

/// Strang split-step propagator. Real time uses a complex step of -i dt/hbar,
/// imaginary time a real step of -dtau/hbar through the same kernel.
template <typename Scalar>
class SplitStepKernel {
 public:
  using Grid = BasicGrid1D<Scalar>;
  using Complex = std::complex<Scalar>;
  using CVector = ComplexVectorX<Scalar>;
  using RVector = RealVectorX<Scalar>;

  SplitStepKernel(const Grid& grid, Scalar mass, Scalar g1d)
      : grid_(grid), mass_(mass), g1d_(g1d), z_(grid.z()), k_(grid.k()), spectrum_(grid.n_points) {}

  const Grid& grid() const { return grid_; }
  const RVector& z() const { return z_; }
  const RVector& k() const { return k_; }

  /// One symmetric step. `factor` is -i dt / hbar (real time) or -dtau / hbar
  /// (imaginary time); `potential` is V(z) at the step midpoint.
  void step(CVector& psi, const RVector& potential, Complex factor) {
    prepare(factor);
    apply_potential(psi, potential, Scalar(0.5) * factor);
    fft_.fwd(spectrum_, psi);
    spectrum_.array() *= kinetic_phase_.array();
    fft_.inv(psi, spectrum_);
    apply_potential(psi, potential, Scalar(0.5) * factor);
  }

  /// Only the kinetic factor, exposed for checking it against plane waves.
  void kinetic_only(CVector& psi, Complex factor) {
    prepare(factor);
    fft_.fwd(spectrum_, psi);
    spectrum_.array() *= kinetic_phase_.array();
    fft_.inv(psi, spectrum_);
  }

  /// Kinetic, potential and interaction energies, each summed over the grid
  /// (not divided by the norm).
  struct EnergyParts {
    Scalar kinetic, potential, interaction;
    Scalar total() const { return kinetic + potential + interaction; }
  };

  EnergyParts energy_parts(const CVector& psi, const RVector& potential) {
    const Scalar dz = grid_.dz();
    fft_.fwd(spectrum_, psi);
    const Scalar n = static_cast<Scalar>(grid_.n_points);
    const RVector density = psi.cwiseAbs2();
    EnergyParts e{};
    e.kinetic = kHbar * kHbar / (Scalar(2) * mass_) * (k_.array().square() * spectrum_.cwiseAbs2().array()).sum() *
                dz / n;
    e.potential = (potential.array() * density.array()).sum() * dz;
    e.interaction = Scalar(0.5) * g1d_ * density.array().square().sum() * dz;
    return e;
  }

 private:
  void prepare(Complex factor) {
    if (factor == cached_factor_ && kinetic_phase_.size() == grid_.n_points) return;
    cached_factor_ = factor;
    // exp(factor * hbar^2 k^2 / 2m)
    const RVector energy = (kHbar * kHbar / (Scalar(2) * mass_)) * k_.array().square();
    kinetic_phase_ = (factor * energy.template cast<Complex>().array()).exp();
    // real time: drop modes turning by more than pi/2 per step
    if (factor.real() == Scalar(0)) {
      const Scalar limit = std::numbers::pi_v<Scalar> / Scalar(2);
      for (Eigen::Index j = 0; j < kinetic_phase_.size(); ++j)
        if (std::abs(factor.imag()) * energy(j) > limit) kinetic_phase_(j) = Complex(0);
    }
  }

  void apply_potential(CVector& psi, const RVector& potential, Complex half) {
    const RVector v_eff = potential + g1d_ * psi.cwiseAbs2();
    psi.array() *= (half * v_eff.template cast<Complex>().array()).exp();
  }

  Grid grid_;
  Scalar mass_;
  Scalar g1d_;
  RVector z_;
  RVector k_;
  CVector spectrum_;
  CVector kinetic_phase_;
  Complex cached_factor_{};
  Eigen::FFT<Scalar> fft_;
};

Observables observables(const WaveFunction& psi, const ExperimentConfig& cfg);

struct GroundStateResult {
  WaveFunction psi;
  std::vector<double> energies;  // per atom, one per accepted step
  int steps = 0;
  int rejected = 0;
};

/// Imaginary-time relaxation to the ground state of the static trap. Starts from
/// `guess` when given, otherwise from a Gaussian sized to the cloud.
/// Throws GridTooCoarse when dz > xi/4 and NoConvergence after max_imag_steps.
GroundStateResult find_ground_state(const ExperimentConfig& cfg, const Grid1D& grid,
                                    const WaveFunction* guess = nullptr);

inline WaveFunction ground_state(const ExperimentConfig& cfg, const Grid1D& grid) {
  return find_ground_state(cfg, grid).psi;
}

struct EvolveOptions {
  int output_stride = 1;   // steps between Observables rows
  int snapshot_every = 0;  // steps between snapshots, 0 = none
  std::function<void(const WaveFunction&)> on_snapshot;
};

struct Trajectory {
  std::vector<Observables> samples;
  WaveFunction final_state;
};

/// Real-time evolution from psi0 over solver.t_end with solver.dt.
/// Throws UnderResolved, NormDrift or DomainEscape.
Trajectory evolve(const WaveFunction& psi0, const ExperimentConfig& cfg, const EvolveOptions& options = {});

/// Classical centre-of-mass trajectory z'' = -wz^2 z - (m/m_a) A(t) from rest.
std::vector<double> com_reference(const TrapConfig& trap, const DriveSpec& drive, const std::vector<double>& t_grid,
                                  double mass_ratio = 1.0);

/// Writes {n_points u64, dz f64, time f64} then interleaved re/im f64, all
/// little-endian. Throws IoError.
void write_snapshot(const WaveFunction& psi, std::ostream& os);
void write_snapshot(const WaveFunction& psi, const std::string& path);
WaveFunction read_snapshot(const std::string& path);

}  // namespace shaken_trap

#endif  // SHAKEN_TRAP_GPE_HPP

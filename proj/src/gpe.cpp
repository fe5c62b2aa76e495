#include "shaken_trap/gpe.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "shaken_trap/ode.hpp"
#include "shaken_trap/thomas_fermi.hpp"

namespace shaken_trap {

namespace {

using Kernel = SplitStepKernel<double>;

double oscillator_length(double mass, double omega) { return std::sqrt(kHbar / (mass * omega)); }

Eigen::VectorXd static_potential(const GpeModel& m, const Eigen::VectorXd& z) {
  return (0.5 * m.atomic_mass * m.omega_z * m.omega_z) * z.array().square();
}

void renormalize(Eigen::VectorXcd& psi, double dz, double n_atoms) {
  psi *= std::sqrt(n_atoms / (psi.squaredNorm() * dz));
}

double energy_per_atom(Kernel& kernel, const Eigen::VectorXcd& psi, const Eigen::VectorXd& potential) {
  const double norm = psi.squaredNorm() * kernel.grid().dz();
  return kernel.energy_parts(psi, potential).total() / norm;
}

Observables measure(Kernel& kernel, const Eigen::VectorXcd& psi, const Eigen::VectorXd& potential, double t) {
  const double dz = kernel.grid().dz();
  const Eigen::VectorXd density = psi.cwiseAbs2();
  const Eigen::VectorXd& z = kernel.z();
  Observables o{};
  o.time = t;
  o.norm = density.sum() * dz;
  o.energy = kernel.energy_parts(psi, potential).total() / o.norm;
  o.com = (z.array() * density.array()).sum() * dz / o.norm;
  o.width = std::sqrt(std::max(0.0, ((z.array() - o.com).square() * density.array()).sum() * dz / o.norm));
  o.peak_density = density.maxCoeff();
  return o;
}

void write_le(std::ostream& os, const void* data, std::size_t bytes) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  } else {
    const auto* p = static_cast<const char*>(data);
    for (std::size_t i = bytes; i-- > 0;) os.put(p[i]);
  }
}

template <typename T>
T read_le(std::istream& is) {
  char buf[sizeof(T)];
  is.read(buf, sizeof(T));
  if (!is) throw IoError("truncated snapshot");
  if constexpr (std::endian::native != std::endian::little) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

GpeModel gpe_model(const ExperimentConfig& cfg) {
  GpeModel m{};
  m.atomic_mass = cfg.species.atomic_mass;
  m.omega_z = cfg.trap.omega_z;
  m.omega_perp = std::sqrt(cfg.trap.omega_x * cfg.trap.omega_y);
  const double l_perp_sq = kHbar / (m.atomic_mass * m.omega_perp);
  m.g1d = coupling_constant(cfg.species, m.atomic_mass) / (2.0 * std::numbers::pi * l_perp_sq);
  m.perturbation_mass = cfg.perturbation_mass_or(MassConvention::PerAtom);
  m.n_atoms = cfg.n_atoms;
  m.drive = cfg.drive;
  return m;
}

double tf_chemical_potential_1d(const GpeModel& m) {
  if (m.g1d <= 0.0) return 0.0;
  return std::pow(0.75 * m.n_atoms * m.g1d * m.omega_z * std::sqrt(0.5 * m.atomic_mass), 2.0 / 3.0);
}

double default_halfwidth(const ExperimentConfig& cfg) {
  const auto m = gpe_model(cfg);
  const double mu = tf_chemical_potential_1d(m);
  const double r_tf = std::sqrt(2.0 * mu / (m.atomic_mass * m.omega_z * m.omega_z));
  const double cloud = std::max(r_tf, 4.0 * oscillator_length(m.atomic_mass, m.omega_z));

  const double ratio = m.perturbation_mass / m.atomic_mass;
  const double w = m.omega_z, big_w = m.drive.angular_frequency;
  double slosh = 0.0;
  if (m.drive.amplitude > 0.0) {
    const double detuning = std::abs(w * w - big_w * big_w);
    if (detuning > 1e-6 * big_w * big_w)
      slosh = ratio * m.drive.amplitude * big_w * big_w / detuning * (1.0 + big_w / w);
    else
      slosh = 0.5 * ratio * m.drive.amplitude * (1.0 + big_w * cfg.solver.t_end);
  }
  return 1.5 * (cloud + slosh);
}

Grid1D grid_for(const ExperimentConfig& cfg) {
  return Grid1D::make(cfg.solver.grid_points, cfg.solver.domain_halfwidth.value_or(default_halfwidth(cfg)));
}

Observables observables(const WaveFunction& psi, const ExperimentConfig& cfg) {
  const auto m = gpe_model(cfg);
  Kernel kernel(psi.grid, m.atomic_mass, m.g1d);
  const Eigen::VectorXd v = kernel.z().unaryExpr([&](double z) { return m.potential(z, psi.time); });
  return measure(kernel, psi.values, v, psi.time);
}

GroundStateResult find_ground_state(const ExperimentConfig& cfg, const Grid1D& grid, const WaveFunction* guess) {
  const auto m = gpe_model(cfg);
  const double dz = grid.dz();
  const double mu = tf_chemical_potential_1d(m);
  const double l_z = oscillator_length(m.atomic_mass, m.omega_z);

  if (m.g1d > 0.0 && cfg.species.scattering_length > 0.0) {
    // healing length from the peak 3D density of the quasi-1D cloud
    const double l_perp_sq = kHbar / (m.atomic_mass * m.omega_perp);
    const double n3d = (mu / m.g1d) / (std::numbers::pi * l_perp_sq);
    const double xi = 1.0 / std::sqrt(8.0 * std::numbers::pi * n3d * cfg.species.scattering_length);
    if (dz > xi / 4.0)
      throw NumericalError(NumericalError::Kind::GridTooCoarse,
                           "dz = " + std::to_string(dz) + " m exceeds a quarter healing length (" +
                               std::to_string(xi / 4.0) + " m)");
  }

  Kernel kernel(grid, m.atomic_mass, m.g1d);
  const Eigen::VectorXd v = static_potential(m, kernel.z());

  Eigen::VectorXcd psi;
  if (guess) {
    if (guess->grid.n_points != grid.n_points || guess->grid.halfwidth != grid.halfwidth)
      throw std::invalid_argument("ground-state guess lives on a different grid");
    psi = guess->values;
  } else {
    const double r_tf = std::sqrt(2.0 * mu / (m.atomic_mass * m.omega_z * m.omega_z));
    if (r_tf > 2.0 * l_z) {
      psi = ((mu - v.array()).max(0.0) / m.g1d).sqrt().cast<std::complex<double>>();
    } else {
      psi = (-kernel.z().array().square() / (2.0 * l_z * l_z)).exp().cast<std::complex<double>>();
    }
  }
  renormalize(psi, dz, m.n_atoms);

  const double dt_final = cfg.solver.dt;
  const double fastest = std::max(m.omega_z, mu / kHbar);
  double dtau = dt_final;
  for (int s = 0; s < 10 && 2.0 * dtau * fastest <= 0.05; ++s) dtau *= 2.0;
  const double dtau_floor = dt_final * 1e-6;
  const double tol = cfg.solver.imag_time_tol;

  GroundStateResult out;
  double e_prev = energy_per_atom(kernel, psi, v);
  out.energies.push_back(e_prev);
  Eigen::VectorXcd trial;
  while (true) {
    if (out.steps + out.rejected >= cfg.solver.max_imag_steps)
      throw NumericalError(NumericalError::Kind::NoConvergence,
                           "imaginary-time relaxation did not converge in " +
                               std::to_string(cfg.solver.max_imag_steps) + " steps");
    trial = psi;
    kernel.step(trial, v, std::complex<double>(-dtau / kHbar, 0.0));
    renormalize(trial, dz, m.n_atoms);
    const double e = energy_per_atom(kernel, trial, v);
    const double change = std::abs(e - e_prev) / std::abs(e);

    if (e > e_prev && change >= tol) {
      ++out.rejected;
      dtau *= 0.5;
      if (dtau < dtau_floor)
        throw NumericalError(NumericalError::Kind::NoConvergence, "imaginary-time step collapsed");
      continue;
    }
    if (e <= e_prev) {
      psi = trial;
      ++out.steps;
      out.energies.push_back(e);
      e_prev = e;
    }
    if (change < tol) {
      if (dtau <= dt_final) break;
      dtau = std::max(dt_final, 0.5 * dtau);
    }
  }
  out.psi = WaveFunction{grid, std::move(psi), 0.0};
  return out;
}

Trajectory evolve(const WaveFunction& psi0, const ExperimentConfig& cfg, const EvolveOptions& options) {
  const auto m = gpe_model(cfg);
  const double dt = cfg.solver.dt;
  Kernel kernel(psi0.grid, m.atomic_mass, m.g1d);
  const Eigen::VectorXd& z = kernel.z();
  const Eigen::VectorXd v_static = static_potential(m, z);

  {
    const auto parts = kernel.energy_parts(psi0.values, v_static);
    const double norm = psi0.norm();
    const double mu = std::abs(parts.kinetic + parts.potential + 2.0 * parts.interaction) / norm;
    double limit = std::min(2.0 * std::numbers::pi / m.omega_z, 2.0 * std::numbers::pi / m.drive.angular_frequency);
    if (mu > 0.0) limit = std::min(limit, kHbar / mu);
    if (dt > 0.1 * limit * (1.0 + 1e-12))
      throw NumericalError(NumericalError::Kind::UnderResolved,
                           "dt = " + std::to_string(dt) + " s exceeds 0.1 of the fastest time scale (" +
                               std::to_string(limit) + " s)");
  }

  const auto n_steps = static_cast<long>(std::llround(cfg.solver.t_end / dt));
  const int stride = std::max(1, options.output_stride);
  const double n_atoms = m.n_atoms;

  Trajectory traj;
  Eigen::VectorXcd psi = psi0.values;
  double t = psi0.time;
  const std::complex<double> factor(0.0, -dt / kHbar);
  Eigen::VectorXd v(z.size());

  auto record = [&](double time) {
    v = v_static + (m.perturbation_mass * acceleration(m.drive, time)) * z;
    const auto o = measure(kernel, psi, v, time);
    if (std::abs(o.norm - n_atoms) / n_atoms > 1e-6)
      throw NumericalError(NumericalError::Kind::NormDrift,
                           "norm drifted to " + std::to_string(o.norm) + " at t = " + std::to_string(time));
    const double edge = std::max(std::norm(psi(0)), std::norm(psi(psi.size() - 1)));
    if (edge > 1e-6 * o.peak_density)
      throw NumericalError(NumericalError::Kind::DomainEscape,
                           "density reached the domain boundary at t = " + std::to_string(time));
    traj.samples.push_back(o);
  };

  record(t);
  for (long step = 1; step <= n_steps; ++step) {
    const double t_mid = t + 0.5 * dt;
    v = v_static + (m.perturbation_mass * acceleration(m.drive, t_mid)) * z;
    kernel.step(psi, v, factor);
    t = psi0.time + static_cast<double>(step) * dt;
    if (step % stride == 0 || step == n_steps) record(t);
    if (options.snapshot_every > 0 && options.on_snapshot && step % options.snapshot_every == 0)
      options.on_snapshot(WaveFunction{psi0.grid, psi, t});
  }
  traj.final_state = WaveFunction{psi0.grid, std::move(psi), t};
  return traj;
}

std::vector<double> com_reference(const TrapConfig& trap, const DriveSpec& drive, const std::vector<double>& t_grid,
                                  double mass_ratio) {
  if (drive.amplitude == 0.0 || mass_ratio == 0.0) return std::vector<double>(t_grid.size(), 0.0);
  const double w = trap.omega_z, big_w = drive.angular_frequency;
  const double z_scale = mass_ratio * drive.amplitude * std::max(1.0, big_w * big_w / (w * w));
  const Eigen::Vector2d atol(1e-12 * z_scale, 1e-12 * z_scale * std::max(w, big_w));
  auto rhs = [&](double t, const Eigen::Vector2d& y) {
    return Eigen::Vector2d(y(1), -w * w * y(0) - mass_ratio * acceleration(drive, t));
  };
  const auto states = integrate_dopri5(rhs, 0.0, Eigen::Vector2d::Zero().eval(), t_grid, 1e-12, atol,
                                       0.01 / std::max(w, big_w));
  std::vector<double> z(states.size());
  std::transform(states.begin(), states.end(), z.begin(), [](const Eigen::Vector2d& s) { return s(0); });
  return z;
}

void write_snapshot(const WaveFunction& psi, std::ostream& os) {
  const auto n = static_cast<std::uint64_t>(psi.grid.n_points);
  const double dz = psi.grid.dz();
  write_le(os, &n, sizeof n);
  write_le(os, &dz, sizeof dz);
  write_le(os, &psi.time, sizeof psi.time);
  for (Eigen::Index j = 0; j < psi.values.size(); ++j) {
    const double re = psi.values(j).real(), im = psi.values(j).imag();
    write_le(os, &re, sizeof re);
    write_le(os, &im, sizeof im);
  }
}

void write_snapshot(const WaveFunction& psi, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_snapshot(psi, os);
  if (!os) throw IoError("failed writing " + path);
}

WaveFunction read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  const auto n = read_le<std::uint64_t>(is);
  const double dz = read_le<double>(is);
  const double time = read_le<double>(is);
  WaveFunction psi{Grid1D{static_cast<Eigen::Index>(n), 0.5 * dz * static_cast<double>(n)},
                   Eigen::VectorXcd(static_cast<Eigen::Index>(n)), time};
  for (Eigen::Index j = 0; j < psi.values.size(); ++j) {
    const double re = read_le<double>(is);
    const double im = read_le<double>(is);
    psi.values(j) = {re, im};
  }
  return psi;
}

}  // namespace shaken_trap

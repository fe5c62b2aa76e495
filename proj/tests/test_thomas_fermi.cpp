#include <doctest.h>

#include <cmath>
#include <numbers>

#include "shaken_trap/config.hpp"
#include "shaken_trap/errors.hpp"
#include "shaken_trap/thomas_fermi.hpp"

using namespace shaken_trap;
using std::numbers::pi;

namespace {

ExperimentConfig tf_config(double n_atoms, double amplitude) {
  ExperimentConfig cfg;
  cfg.species = species_rb87();
  cfg.trap = {2.0 * pi * 151.0, 2.0 * pi * 151.0, 2.0 * pi * 151.0};
  cfg.drive = {amplitude, 2.0 * pi * 1000.0, 0.0, std::nullopt};
  cfg.n_atoms = n_atoms;
  cfg.mass_convention = MassConvention::TotalCondensate;
  return cfg;
}

double period(const ExperimentConfig& cfg) { return 2.0 * pi / cfg.drive.angular_frequency; }

}  // namespace

TEST_SUITE("tf-analysis") {
  TEST_CASE("standard chemical potential reproduces the atom number") {
    const auto cfg = tf_config(1e5, 0.0);
    const double mu = chemical_potential(MuModel::standard(), cfg.n_atoms, cfg.trap, cfg.species);
    const double g = coupling_constant(cfg.species, cfg.species.atomic_mass);
    const double w2 = cfg.trap.omega_x * cfg.trap.omega_y * cfg.trap.omega_z;
    // integral of (mu - V)/g over the ellipsoid: (8 pi / 15) mu^(5/2) (2/m)^(3/2) / (g wx wy wz)
    const double atoms = 8.0 * pi / 15.0 * std::pow(mu, 2.5) * std::pow(2.0 / cfg.species.atomic_mass, 1.5) / (g * w2);
    CHECK(atoms == doctest::Approx(cfg.n_atoms).epsilon(1e-12));
  }

  TEST_CASE("chemical potential models") {
    const auto cfg = tf_config(1e3, 0.0);
    CHECK(chemical_potential(MuModel::from_tc(2e-7), 1e3, cfg.trap, cfg.species) ==
          doctest::Approx(0.3 * kBoltzmann * 2e-7));
    CHECK(chemical_potential(MuModel::explicit_value(1e-30), 1e3, cfg.trap, cfg.species) == 1e-30);
    CHECK_THROWS_AS(chemical_potential(MuModel{MuModelKind::Explicit, std::nullopt, std::nullopt}, 1e3, cfg.trap,
                                       cfg.species),
                    ConfigError);
    CHECK_THROWS_AS(chemical_potential(MuModel{MuModelKind::FractionOfTc, std::nullopt, std::nullopt}, 1e3,
                                       cfg.trap, cfg.species),
                    ConfigError);
    MuModelKind k{};
    CHECK(parse_mu_model("paper_prescription", k));
    CHECK(k == MuModelKind::FractionOfTc);
    CHECK_FALSE(parse_mu_model("tf", k));
  }

  TEST_CASE("total potential") {
    auto cfg = tf_config(10.0, 0.01);
    const auto p = tf_potential_params(cfg);
    CHECK(p.perturbation_mass == doctest::Approx(10.0 * cfg.species.atomic_mass));
    const double t = 0.3e-3;
    const double w = cfg.trap.omega_z;
    const double expected = 0.5 * cfg.species.atomic_mass * w * w * (1e-12 + 4e-12 + 9e-12) +
                            p.perturbation_mass * (-cfg.drive.peak_acceleration() * std::sin(cfg.drive.angular_frequency * t)) * 3e-6;
    CHECK(total_potential(p, 1e-6, 2e-6, 3e-6, t) == doctest::Approx(expected).epsilon(1e-14));
    cfg.mass_convention.reset();
    CHECK(tf_potential_params(cfg).perturbation_mass == p.perturbation_mass);
  }

  TEST_CASE("density identity and beyond-TF flag") {
    const double g = coupling_constant(species_rb87(), species_rb87().atomic_mass);
    const double mu = 3e-31;
    for (double v : {-1e-30, 0.0, 1e-31, 2.999e-31}) {
      const auto n = tf_density(mu, v, g);
      CHECK_FALSE(n.beyond_tf);
      CHECK(std::abs(g * n.density + v - mu) <= 1e-12 * mu);
    }
    CHECK(tf_density(mu, mu, g).density == 0.0);
    CHECK_FALSE(tf_density(mu, mu, g).beyond_tf);
    CHECK(tf_density(mu, 2.0 * mu, g).beyond_tf);
    CHECK(tf_density(mu, 2.0 * mu, g).density == 0.0);
  }

  TEST_CASE("static profile: even, parabolic, normalized") {
    const auto cfg = tf_config(1e4, 0.0);
    const auto model = MuModel::standard();
    const double mu = chemical_potential(model, cfg.n_atoms, cfg.trap, cfg.species);
    const double r = tf_radius_z(mu, cfg.species, cfg.trap);
    Eigen::VectorXd z(2001);
    for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = 1.2 * r * static_cast<double>(k - 1000) / 1000.0;
    const Eigen::VectorXd n = tf_profile(cfg, model, 0.0, z);
    const double n0 = n(1000);
    const double g = coupling_constant(cfg.species, cfg.species.atomic_mass);
    CHECK(n0 == doctest::Approx(mu / g).epsilon(1e-12));
    for (Eigen::Index k = 0; k < z.size(); ++k) {
      CHECK(n(k) == n(z.size() - 1 - k));
      if (std::abs(z(k)) < r) CHECK(n(k) == doctest::Approx(n0 * (1.0 - z(k) * z(k) / (r * r))).epsilon(1e-9));
      else CHECK(n(k) == 0.0);
    }
    double integral = 0;
    for (Eigen::Index k = 1; k < z.size(); ++k) integral += 0.5 * (z(k) - z(k - 1)) * (n(k) + n(k - 1));
    CHECK(integral == doctest::Approx(4.0 / 3.0 * n0 * r).epsilon(1e-3));
  }

  TEST_CASE("ratio is identically one without drive") {
    const auto cfg = tf_config(1e3, 0.0);
    const auto trace = density_ratio_trace(cfg, 1e-6, MuModel::standard(), 2.0 * period(cfg), period(cfg) / 40.0);
    for (double r : trace.ratio) CHECK(r == 1.0);
    CHECK(trace.peak_deviation() == 0.0);
    CHECK(trace.times.size() == 81);
  }

  TEST_CASE("ratio is periodic in the drive period") {
    const auto cfg = tf_config(1e3, 1e-14);
    const auto trace = density_ratio_trace(cfg, 1e-6, MuModel::standard(), 3.0 * period(cfg), period(cfg) / 40.0);
    REQUIRE(trace.ratio.size() == 121);
    CHECK(trace.peak_deviation() > 0.0);
    for (std::size_t k = 0; k + 40 < trace.ratio.size(); ++k) CHECK(std::abs(trace.ratio[k] - trace.ratio[k + 40]) <= 1e-9);
  }

  TEST_CASE("peak deviation grows with amplitude and atom number") {
    const double amps[] = {1e-16, 1e-15, 1e-14, 1e-13};
    const double atoms[] = {1e3, 1e4, 1e5, 1e6};
    double grid[4][4];
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const auto cfg = tf_config(atoms[j], amps[i]);
        const auto trace = density_ratio_trace(cfg, 1e-6, MuModel::standard(), period(cfg), period(cfg) / 40.0);
        for (bool b : trace.beyond_tf) REQUIRE_FALSE(b);
        grid[i][j] = trace.peak_deviation();
      }
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        if (i > 0) CHECK(grid[i][j] >= grid[i - 1][j]);
        if (j > 0) CHECK(grid[i][j] >= grid[i][j - 1]);
      }
  }

  TEST_CASE("atom-number exponent is three fifths") {
    std::vector<double> x, y;
    for (double n = 1e3; n <= 1e6 * 1.0001; n *= std::sqrt(10.0)) {
      const auto cfg = tf_config(n, 1e-14);
      const auto trace = density_ratio_trace(cfg, 1e-8, MuModel::standard(), period(cfg), period(cfg) / 40.0);
      x.push_back(std::log(n));
      y.push_back(std::log(trace.peak_deviation()));
    }
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < x.size(); ++k) mx += x[k] / x.size(), my += y[k] / y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < x.size(); ++k) sxy += (x[k] - mx) * (y[k] - my), sxx += (x[k] - mx) * (x[k] - mx);
    CHECK(sxy / sxx == doctest::Approx(0.6).epsilon(0.02 / 0.6));
  }

  TEST_CASE("strong drive is flagged, not clamped into the ratio") {
    const auto cfg = tf_config(1e3, 0.01);
    const auto trace = density_ratio_trace(cfg, 1e-6, MuModel::standard(), period(cfg), period(cfg) / 40.0);
    bool any = false;
    for (std::size_t k = 0; k < trace.ratio.size(); ++k) {
      CHECK(std::isfinite(trace.ratio[k]));
      if (trace.beyond_tf[k]) {
        any = true;
        CHECK(trace.ratio[k] == 0.0);
      }
    }
    CHECK(any);
  }

  TEST_CASE("errors") {
    const auto cfg = tf_config(1e3, 1e-14);
    CHECK_THROWS_AS(density_ratio_trace(cfg, 1e-3, MuModel::standard(), 1e-3, 1e-5), NumericalError);
    CHECK_THROWS_AS(density_ratio_trace(cfg, 1e-6, MuModel::standard(), 1e-3, 1e-3), NumericalError);
  }
}

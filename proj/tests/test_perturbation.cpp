#include <doctest.h>

#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include "shaken_trap/drive.hpp"
#include "shaken_trap/errors.hpp"
#include "shaken_trap/perturbation.hpp"
#include "shaken_trap/units.hpp"

using namespace shaken_trap;
using std::numbers::pi;

namespace {

const double kMass = species_rb87().atomic_mass;

// Classical energy of z'' = -w^2 z + a w^2 sin(w t) from rest, in units of hbar w.
// Resonant solution z = (a/2)(sin wt - wt cos wt), z' = (a/2) w^2 t sin wt.
double resonant_alpha_sq(double mass, double a, double w, double t) {
  const double z = 0.5 * a * (std::sin(w * t) - w * t * std::cos(w * t));
  const double v = 0.5 * a * w * w * t * std::sin(w * t);
  return 0.5 * mass * (v * v + w * w * z * z) / (kHbar * w);
}

double ulp_distance(double a, double b) {
  return std::abs(static_cast<double>(std::bit_cast<std::int64_t>(a) - std::bit_cast<std::int64_t>(b)));
}

}  // namespace

TEST_SUITE("qho-perturbation") {
  TEST_CASE("selection rule and symmetry of the position element") {
    const double w = 2.0 * pi * 100.0;
    for (int i = 0; i <= 20; ++i)
      for (int n = 0; n <= 20; ++n) {
        const double x = position_matrix_element(i, n, kMass, w);
        if (std::abs(n - i) != 1) CHECK(x == 0.0);
        else CHECK(x > 0.0);
        CHECK(x == position_matrix_element(n, i, kMass, w));
      }
    CHECK(position_matrix_element(0, 1, kMass, w) == doctest::Approx(std::sqrt(kHbar / (2.0 * kMass * w))));
  }

  TEST_CASE("first-order amplitude against the coherent-state oracle") {
    const double w = 2.0 * pi * 100.0;
    const double periods = 20.0;
    const double t = periods * 2.0 * pi / w;
    for (double target : {1e-5, 1e-4, 1e-3}) {
      const double a = std::sqrt(8.0 * kHbar * target / (kMass * w * w * w * t * t));
      const DriveSpec d{a, w, 0.0, std::nullopt};
      const auto sig = synth_signal(d, t / (periods * 400.0), static_cast<Eigen::Index>(periods * 400.0) + 1);
      const double alpha_sq = resonant_alpha_sq(kMass, a, w, t);
      CHECK(alpha_sq == doctest::Approx(target).epsilon(1e-2));

      const auto exact = exact_displaced_oscillator(kMass, w, sig, t);
      CHECK(std::norm(exact.alpha) == doctest::Approx(alpha_sq).epsilon(1e-8));
      double total = 0;
      for (double p : exact.populations) total += p;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
      const double p1_independent = alpha_sq * std::exp(-alpha_sq);
      CHECK(exact.populations.at(1) == doctest::Approx(p1_independent).epsilon(1e-7));

      const auto pert = first_order_transition(0, 1, kMass, w, sig, t);
      CHECK(pert.valid_first_order);
      CHECK(pert.probability == doctest::Approx(std::norm(pert.amplitude)));
      const double rel = std::abs(pert.probability - exact.populations[1]) / exact.populations[1];
      CHECK(rel <= std::max(0.005, 3.0 * alpha_sq));
      CHECK(first_order_transition(0, 2, kMass, w, sig, t).probability == 0.0);
    }
  }

  TEST_CASE("validity flag trips above the threshold") {
    const double w = 2.0 * pi * 100.0;
    const double t = 0.2;
    const DriveSpec d{1e-3, w, 0.0, std::nullopt};
    const auto sig = synth_signal(d, t / 8000.0, 8001);
    CHECK_FALSE(first_order_transition(0, 1, kMass, w, sig, t).valid_first_order);
    CHECK_THROWS_AS(first_order_coeff(0, 1, kMass, w, sig, 2.0 * t), std::out_of_range);
  }

  TEST_CASE("transition rates from a flat spectrum") {
    const double w = 2.0 * pi * 150.0;
    const auto s = SpectralDensity::flat(4.0, 1e5);
    const double unit = kMass * 4.0 / (2.0 * kHbar * w);
    CHECK(transition_rate(0, 1, kMass, w, s).value == doctest::Approx(unit));
    CHECK(transition_rate(3, 4, kMass, w, s).value == doctest::Approx(4.0 * unit));
    CHECK(transition_rate(3, 2, kMass, w, s).value == doctest::Approx(3.0 * unit));
    CHECK(transition_rate(3, 5, kMass, w, s).value == 0.0);
    CHECK_FALSE(transition_rate(0, 1, kMass, w, s).is_distributional);
    CHECK_THROWS_AS(transition_rate(0, 1, kMass, 2e5, s), NumericalError);
  }

  TEST_CASE("absorbed power does not depend on the initial level") {
    const double w = 2.0 * pi * 150.0;
    const auto s = SpectralDensity::flat(7.3, 1e5);
    const auto p0 = absorbed_power(kMass, w, s, 0);
    CHECK(p0.power == doctest::Approx(0.5 * kMass * 7.3));
    for (int i = 1; i <= 10; ++i)
      CHECK(std::bit_cast<std::uint64_t>(absorbed_power(kMass, w, s, i).power) ==
            std::bit_cast<std::uint64_t>(p0.power));
    // hbar w (up - down) assembled from rates agrees
    for (int i = 0; i <= 10; ++i) {
      const double up = transition_rate(i, i + 1, kMass, w, s).value;
      const double down = i > 0 ? transition_rate(i, i - 1, kMass, w, s).value : 0.0;
      CHECK(kHbar * w * (up - down) == doctest::Approx(p0.power).epsilon(1e-12));
    }
  }

  TEST_CASE("line spectrum gives distributional power only on resonance") {
    const double big_w = 2.0 * pi * 1000.0;
    const auto s = analytic_psd_sine(0.01 * big_w * big_w, big_w);
    const auto on = absorbed_power(kMass, big_w, s);
    CHECK(on.is_distributional);
    CHECK(on.power == doctest::Approx(0.5 * kMass * pi * std::pow(0.01 * big_w * big_w, 2) / 2.0));
    const auto off = absorbed_power(kMass, 0.9 * big_w, s);
    CHECK_FALSE(off.is_distributional);
    CHECK(off.power == 0.0);
    CHECK(transition_rate(0, 1, kMass, big_w, s).is_distributional);
  }

  TEST_CASE("ensemble average: closed form and symbolic integral") {
    const double big_w = 2.0 * pi * 1000.0;
    const double oracle = pi * kMass * 0.01 * 0.01 * big_w * big_w * big_w / 4.0;
    CHECK(ensemble_averaged_power(kMass, 0.01, big_w) == doctest::Approx(2.8115e-18).epsilon(1e-4));
    CHECK(ensemble_averaged_power(kMass, 0.01, big_w) == doctest::Approx(oracle).epsilon(1e-15));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-4.0, -1.0), f(1.0, 4.0);
    for (int k = 0; k < 200; ++k) {
      const double a = std::pow(10.0, u(rng));
      const double w = 2.0 * pi * std::pow(10.0, f(rng));
      CHECK(ulp_distance(ensemble_averaged_power(kMass, a, w), ensemble_average_symbolic(kMass, a, w)) <= 8.0);
    }
  }

  TEST_CASE("power law exponents") {
    const double w = 2.0 * pi * 1000.0;
    auto slope = [](double x0, double x1, double y0, double y1) { return std::log(y1 / y0) / std::log(x1 / x0); };
    CHECK(slope(1e-3, 2e-3, ensemble_averaged_power(kMass, 1e-3, w), ensemble_averaged_power(kMass, 2e-3, w)) ==
          doctest::Approx(2.0).epsilon(1e-9));
    CHECK(slope(w, 1.7 * w, ensemble_averaged_power(kMass, 0.01, w), ensemble_averaged_power(kMass, 0.01, 1.7 * w)) ==
          doctest::Approx(3.0).epsilon(1e-9));
  }

  TEST_CASE("energy scales") {
    const auto r = energy_scale_report(2.8115e-18, 1.0, 1e-6, 151.0);
    CHECK(r.kbt == doctest::Approx(1.380649e-29));
    CHECK(r.hf == doctest::Approx(1.0005e-31).epsilon(1e-3));
    CHECK(r.absorbed_over_kbt > 1e11);
  }

  TEST_CASE("Lamb shift monomial scalings") {
    const double m = kMass;
    const auto base = gravitational_lamb_shift(m, 1e6, 2.0 * pi * 2000.0, 1e-5);
    CHECK(base.delta_v == doctest::Approx(1.9e-44).epsilon(0.01));
    CHECK(base.ratio == doctest::Approx(1.4e-14).epsilon(0.02));
    CHECK(gravitational_lamb_shift(m, 1e6, 1.0, 0.0).delta_v == 0.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.5, 3.0);
    for (int k = 0; k < 100; ++k) {
      const double n = 1e3 * u(rng), w = 1e3 * u(rng), len = 1e-3 * u(rng), s = u(rng);
      const double v = gravitational_lamb_shift(m, n, w, len).delta_v;
      CHECK(gravitational_lamb_shift(m, s * n, w, len).delta_v / v == doctest::Approx(s * s * s).epsilon(1e-12));
      CHECK(gravitational_lamb_shift(m, n, s * w, len).delta_v / v == doctest::Approx(s * s).epsilon(1e-12));
      CHECK(gravitational_lamb_shift(m, n, w, s * len).delta_v / v == doctest::Approx(s * s).epsilon(1e-12));
    }
    const double len = lamb_shift_length_for_ratio(m, 1e6, 2.0 * pi * 2000.0, 0.005);
    CHECK(gravitational_lamb_shift(m, 1e6, 2.0 * pi * 2000.0, len).ratio == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(len == doctest::Approx(5.92).epsilon(0.01));
  }
}

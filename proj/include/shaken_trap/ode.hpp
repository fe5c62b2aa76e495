#ifndef SHAKEN_TRAP_ODE_HPP
#define SHAKEN_TRAP_ODE_HPP

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace shaken_trap {

/// Adaptive Dormand-Prince 5(4) integration of y' = f(t, y), reporting the
/// state at each requested time. `t_out` must be non-decreasing and start at or
/// after t0. `atol` is per component.
template <typename State, typename Rhs>
std::vector<State> integrate_dopri5(Rhs&& f, double t0, State y0, const std::vector<double>& t_out, double rtol,
                                    const State& atol, double h_init = 0.0) {
  using Scalar = typename State::Scalar;
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  std::vector<State> out;
  out.reserve(t_out.size());
  double t = t0;
  State y = y0;
  State k1 = f(t, y);
  double h = h_init;
  if (!(h > 0.0)) {
    const double span = t_out.empty() ? 1.0 : std::max(t_out.back() - t0, 1e-300);
    h = span * 1e-4;
  }

  for (double target : t_out) {
    if (target < t) throw std::invalid_argument("integrate_dopri5: output times must be non-decreasing");
    while (t < target) {
      bool last = false;
      double step = h;
      if (t + step >= target) {
        step = target - t;
        last = true;
      }
      const State k2 = f(t + c2 * step, y + step * a21 * k1);
      const State k3 = f(t + c3 * step, y + step * (a31 * k1 + a32 * k2));
      const State k4 = f(t + c4 * step, y + step * (a41 * k1 + a42 * k2 + a43 * k3));
      const State k5 = f(t + c5 * step, y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const State k6 = f(t + step, y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      const State y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const State k7 = f(t + step, y_new);
      const State err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      const State scale = atol.array() + rtol * y.cwiseAbs().cwiseMax(y_new.cwiseAbs()).array();
      const Scalar norm = std::sqrt((err.array() / scale.array()).square().mean());
      const double factor = norm == 0 ? 5.0 : std::clamp(0.9 * std::pow(static_cast<double>(norm), -0.2), 0.2, 5.0);
      if (norm <= 1) {
        t = last ? target : t + step;
        y = y_new;
        k1 = k7;
        if (!last) h = step * factor;
        else h = std::max(h, step * factor);
      } else {
        h = step * factor;
        if (h < 1e-15 * std::max(1.0, std::abs(t))) throw std::runtime_error("integrate_dopri5: step size underflow");
      }
    }
    out.push_back(y);
  }
  return out;
}

}  // namespace shaken_trap

#endif  // SHAKEN_TRAP_ODE_HPP

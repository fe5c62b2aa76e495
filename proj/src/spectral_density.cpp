#include "shaken_trap/spectral_density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shaken_trap {

SpectralDensity::SpectralDensity(Eigen::VectorXd omega, Eigen::VectorXd value,
                                 std::vector<DeltaLine> lines)
    : omega_(std::move(omega)), value_(std::move(value)), lines_(std::move(lines)) {
  if (omega_.size() != value_.size())
    throw std::invalid_argument("SpectralDensity: grid and value sizes differ");
  for (Eigen::Index k = 1; k < omega_.size(); ++k)
    if (!(omega_(k) > omega_(k - 1)))
      throw std::invalid_argument("SpectralDensity: grid must be strictly increasing");
  if ((value_.array() < 0.0).any())
    throw std::invalid_argument("SpectralDensity: negative density");
  for (const auto& l : lines_)
    if (l.weight < 0.0) throw std::invalid_argument("SpectralDensity: negative line weight");
}

SpectralDensity SpectralDensity::flat(double level, double omega_max) {
  Eigen::VectorXd w(2), s(2);
  w << -omega_max, omega_max;
  s << level, level;
  return {std::move(w), std::move(s)};
}

std::optional<SpectralValue> SpectralDensity::evaluate(double w) const {
  for (const auto& l : lines_) {
    if (std::abs(w - l.omega) <= kLineTolerance * std::abs(l.omega))
      return SpectralValue{l.weight, true};
  }
  if (!has_grid()) {
    if (lines_.empty()) return std::nullopt;
    return SpectralValue{0.0, false};
  }
  const Eigen::Index n = omega_.size();
  if (w < omega_(0) || w > omega_(n - 1)) return std::nullopt;
  if (n == 1) return SpectralValue{value_(0), false};
  const double* begin = omega_.data();
  const double* it = std::upper_bound(begin, begin + n, w);
  Eigen::Index hi = std::min<Eigen::Index>(it - begin, n - 1);
  const Eigen::Index lo = hi - 1;
  const double frac = (w - omega_(lo)) / (omega_(hi) - omega_(lo));
  return SpectralValue{value_(lo) + frac * (value_(hi) - value_(lo)), false};
}

double SpectralDensity::integrate() const {
  double total = 0.0;
  for (Eigen::Index k = 1; k < omega_.size(); ++k)
    total += 0.5 * (value_(k) + value_(k - 1)) * (omega_(k) - omega_(k - 1));
  for (const auto& l : lines_) total += l.weight;
  return total;
}

double SpectralDensity::evenness_violation() const {
  double worst = 0.0;
  const double span = omega_.size() > 0 ? omega_.cwiseAbs().maxCoeff() : 0.0;
  for (Eigen::Index k = 0; k < omega_.size(); ++k) {
    // a node within roundoff of -omega is the mirror; interpolate otherwise
    const double* first = omega_.data();
    const double* last = first + omega_.size();
    const double* it = std::lower_bound(first, last, -omega_(k));
    double b = 0.0;
    if (it != last && std::abs(*it + omega_(k)) <= 1e-12 * span) {
      b = value_(it - first);
    } else if (it != first && std::abs(*(it - 1) + omega_(k)) <= 1e-12 * span) {
      b = value_(it - first - 1);
    } else {
      const auto mirror = evaluate(-omega_(k));
      if (!mirror) return 1.0;
      b = mirror->value;
    }
    const double a = value_(k);
    const double scale = std::max(std::abs(a), std::abs(b));
    if (scale > 0.0) worst = std::max(worst, std::abs(a - b) / scale);
  }
  for (const auto& l : lines_) {
    bool paired = false;
    for (const auto& m : lines_)
      if (std::abs(m.omega + l.omega) <= kLineTolerance * std::abs(l.omega) && m.weight == l.weight)
        paired = true;
    if (!paired) worst = std::max(worst, 1.0);
  }
  return worst;
}

}  // namespace shaken_trap

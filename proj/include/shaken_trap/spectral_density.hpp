#ifndef SHAKEN_TRAP_SPECTRAL_DENSITY_HPP
#define SHAKEN_TRAP_SPECTRAL_DENSITY_HPP

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace shaken_trap {

/// weight * delta(w - omega)
struct DeltaLine {
  double omega;
  double weight;
};

/// Result of evaluating S at a frequency. When `is_line` is set, `value` is the
/// weight of a delta line sitting there rather than a density.
struct SpectralValue {
  double value;
  bool is_line;
};

/// Two-sided power spectral density: a sampled grid plus symbolic delta lines.
/// Units follow the convention <A^2> = (1/2pi) * integral S dw.
class SpectralDensity {
 public:
  /// Relative tolerance for matching a frequency to a line.
  static constexpr double kLineTolerance = 1e-9;

  SpectralDensity() = default;
  SpectralDensity(Eigen::VectorXd omega, Eigen::VectorXd value, std::vector<DeltaLine> lines = {});

  /// Constant S0 on [-omega_max, omega_max].
  static SpectralDensity flat(double level, double omega_max);

  const Eigen::VectorXd& omega() const { return omega_; }
  const Eigen::VectorXd& value() const { return value_; }
  const std::vector<DeltaLine>& lines() const { return lines_; }

  bool has_grid() const { return omega_.size() > 0; }

  /// Line lookup first, then linear interpolation on the grid. A spectrum made
  /// only of lines is zero between them. Returns nullopt when the grid does not
  /// cover `w` and no line sits there.
  std::optional<SpectralValue> evaluate(double w) const;

  /// Trapezoid integral of the grid part plus the sum of line weights.
  double integrate() const;

  /// Largest relative mismatch between S(w) and S(-w) over the grid, and line
  /// weights without a mirrored partner count as 1.
  double evenness_violation() const;

 private:
  Eigen::VectorXd omega_;
  Eigen::VectorXd value_;
  std::vector<DeltaLine> lines_;
};

}  // namespace shaken_trap

#endif  // SHAKEN_TRAP_SPECTRAL_DENSITY_HPP

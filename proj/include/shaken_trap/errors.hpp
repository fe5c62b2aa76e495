#ifndef SHAKEN_TRAP_ERRORS_HPP
#define SHAKEN_TRAP_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace shaken_trap {

/// Problems found while validating a configuration document. Every issue names
/// the dotted key it refers to.
enum class ConfigIssueKind {
  MissingField,
  NonPositiveFrequency,
  NonPositiveMass,
  UnknownMassConvention,
  UnknownParameterPath,
  InvalidValue,
};

struct ConfigIssue {
  ConfigIssueKind kind;
  std::string key;
  std::string detail;
};

const char* to_string(ConfigIssueKind kind);

/// Thrown with the full list of issues collected in a single validation pass.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  ConfigError(ConfigIssueKind kind, std::string key, std::string detail = {});

  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }
  bool has(ConfigIssueKind kind, const std::string& key) const;

 private:
  std::vector<ConfigIssue> issues_;
};

/// Failures of a numerical procedure (bad resolution, divergence, escape).
class NumericalError : public std::runtime_error {
 public:
  enum class Kind {
    UnderResolved,
    NoConvergence,
    GridTooCoarse,
    NormDrift,
    DomainEscape,
    ProbeOutsideCloud,
    SpectralValueUnavailable,
    LengthMismatch,
  };

  NumericalError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shaken_trap

#endif  // SHAKEN_TRAP_ERRORS_HPP

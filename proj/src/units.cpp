#include "shaken_trap/units.hpp"

#include <array>

#include "shaken_trap/errors.hpp"

namespace shaken_trap {

AtomSpecies species_rb87() { return AtomSpecies{"Rb87", 1.44316e-25, 5.28e-9}; }

bool lookup_species(const std::string& name, AtomSpecies& out) {
  // masses from the atomic mass evaluation, scattering lengths from the usual
  // background values
  static const std::array<AtomSpecies, 4> table{{
      species_rb87(),
      {"Na23", 22.98976928 * kAtomicMassUnit, 2.75e-9},
      {"K39", 38.96370649 * kAtomicMassUnit, -1.7e-9},
      {"Li7", 7.01600343 * kAtomicMassUnit, -1.46e-9},
  }};
  for (const auto& s : table) {
    if (s.name == name) {
      out = s;
      return true;
    }
  }
  return false;
}

const char* to_string(MassConvention c) {
  return c == MassConvention::PerAtom ? "per_atom" : "total_condensate";
}

bool parse_mass_convention(const std::string& text, MassConvention& out) {
  if (text == "per_atom") {
    out = MassConvention::PerAtom;
    return true;
  }
  if (text == "total_condensate") {
    out = MassConvention::TotalCondensate;
    return true;
  }
  return false;
}

const char* to_string(ConfigIssueKind kind) {
  switch (kind) {
    case ConfigIssueKind::MissingField: return "MissingField";
    case ConfigIssueKind::NonPositiveFrequency: return "NonPositiveFrequency";
    case ConfigIssueKind::NonPositiveMass: return "NonPositiveMass";
    case ConfigIssueKind::UnknownMassConvention: return "UnknownMassConvention";
    case ConfigIssueKind::UnknownParameterPath: return "UnknownParameterPath";
    case ConfigIssueKind::InvalidValue: return "InvalidValue";
  }
  return "?";
}

namespace {
std::string describe(const std::vector<ConfigIssue>& issues) {
  std::string msg = "invalid configuration:";
  for (const auto& i : issues) {
    msg += "\n  ";
    msg += to_string(i.kind);
    msg += " (" + i.key + ")";
    if (!i.detail.empty()) msg += ": " + i.detail;
  }
  return msg;
}
}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::runtime_error(describe(issues)), issues_(std::move(issues)) {}

ConfigError::ConfigError(ConfigIssueKind kind, std::string key, std::string detail)
    : ConfigError(std::vector<ConfigIssue>{{kind, std::move(key), std::move(detail)}}) {}

bool ConfigError::has(ConfigIssueKind kind, const std::string& key) const {
  for (const auto& i : issues_)
    if (i.kind == kind && i.key == key) return true;
  return false;
}

}  // namespace shaken_trap

#include "shaken_trap/config.hpp"

#include <cmath>
#include <vector>

#include "shaken_trap/errors.hpp"

namespace shaken_trap {

namespace {

using nlohmann::json;

class Reader {
 public:
  explicit Reader(const json& root) : root_(root) {}

  const json* find(const std::string& dotted) const {
    const json* node = &root_;
    std::size_t start = 0;
    while (true) {
      const auto dot = dotted.find('.', start);
      const std::string key = dotted.substr(start, dot - start);
      if (!node->is_object()) return nullptr;
      auto it = node->find(key);
      if (it == node->end() || it->is_null()) return nullptr;
      node = &*it;
      if (dot == std::string::npos) return node;
      start = dot + 1;
    }
  }

  std::optional<double> number(const std::string& key, bool required) {
    const json* node = find(key);
    if (!node) {
      if (required) issue(ConfigIssueKind::MissingField, key);
      return std::nullopt;
    }
    if (!node->is_number()) {
      issue(ConfigIssueKind::InvalidValue, key, "expected a number");
      return std::nullopt;
    }
    return node->get<double>();
  }

  std::optional<std::string> text(const std::string& key, bool required) {
    const json* node = find(key);
    if (!node) {
      if (required) issue(ConfigIssueKind::MissingField, key);
      return std::nullopt;
    }
    if (!node->is_string()) {
      issue(ConfigIssueKind::InvalidValue, key, "expected a string");
      return std::nullopt;
    }
    return node->get<std::string>();
  }

  /// Required positive frequency in Hz, returned as angular frequency.
  double angular(const std::string& key, bool required, double fallback_hz) {
    const auto f = number(key, required);
    if (!f) return angular_from_hz(fallback_hz);
    if (!(*f > 0.0)) issue(ConfigIssueKind::NonPositiveFrequency, key, "must be > 0 Hz");
    return angular_from_hz(*f);
  }

  void issue(ConfigIssueKind kind, const std::string& key, std::string detail = {}) {
    issues_.push_back({kind, key, std::move(detail)});
  }

  std::vector<ConfigIssue>& issues() { return issues_; }

 private:
  const json& root_;
  std::vector<ConfigIssue> issues_;
};

bool is_power_of_two(long v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

ExperimentConfig validate_config(const json& raw) {
  Reader r(raw);
  ExperimentConfig cfg;

  if (!raw.is_object()) r.issue(ConfigIssueKind::InvalidValue, "<root>", "configuration must be a JSON object");

  // species: defaults to Rb-87, a known name fills in the rest
  cfg.species = species_rb87();
  if (const auto name = r.text("species.name", false)) {
    AtomSpecies known;
    if (lookup_species(*name, known)) {
      cfg.species = known;
    } else {
      cfg.species.name = *name;
      if (!r.find("species.atomic_mass_kg"))
        r.issue(ConfigIssueKind::MissingField, "species.atomic_mass_kg", "unknown species '" + *name + "'");
      if (!r.find("species.scattering_length_m"))
        r.issue(ConfigIssueKind::MissingField, "species.scattering_length_m", "unknown species '" + *name + "'");
    }
  }
  if (const auto m = r.number("species.atomic_mass_kg", false)) {
    if (!(*m > 0.0)) r.issue(ConfigIssueKind::NonPositiveMass, "species.atomic_mass_kg", "must be > 0 kg");
    cfg.species.atomic_mass = *m;
  }
  if (const auto as = r.number("species.scattering_length_m", false)) cfg.species.scattering_length = *as;

  cfg.trap.omega_x = r.angular("trap.omega_x_hz", true, 1.0);
  cfg.trap.omega_y = r.angular("trap.omega_y_hz", true, 1.0);
  cfg.trap.omega_z = r.angular("trap.omega_z_hz", true, 1.0);

  if (const auto a = r.number("drive.amplitude_m", true)) {
    if (*a < 0.0) r.issue(ConfigIssueKind::InvalidValue, "drive.amplitude_m", "must be >= 0");
    cfg.drive.amplitude = *a;
  }
  cfg.drive.angular_frequency = r.angular("drive.frequency_hz", true, 1.0);
  if (const auto ph = r.number("drive.phase_rad", false)) cfg.drive.phase = *ph;

  if (r.find("drive.noise")) {
    NoiseSpec noise;
    if (const auto kind = r.text("drive.noise.kind", true)) {
      if (*kind == "white")
        noise.kind = NoiseKind::White;
      else if (*kind == "band_limited")
        noise.kind = NoiseKind::BandLimited;
      else
        r.issue(ConfigIssueKind::InvalidValue, "drive.noise.kind", "expected white or band_limited");
    }
    if (const auto level = r.number("drive.noise.level", true)) {
      if (*level < 0.0) r.issue(ConfigIssueKind::InvalidValue, "drive.noise.level", "must be >= 0");
      noise.accel_psd_level = *level;
    }
    if (const auto seed = r.number("drive.noise.seed", false)) {
      if (*seed < 0.0 || *seed != std::floor(*seed))
        r.issue(ConfigIssueKind::InvalidValue, "drive.noise.seed", "must be a non-negative integer");
      else
        noise.seed = r.find("drive.noise.seed")->get<std::uint64_t>();
    }
    if (noise.kind == NoiseKind::BandLimited) {
      const auto lo = r.number("drive.noise.band_lo_hz", true);
      const auto hi = r.number("drive.noise.band_hi_hz", true);
      if (lo && hi) {
        if (*lo < 0.0 || !(*lo < *hi))
          r.issue(ConfigIssueKind::InvalidValue, "drive.noise.band_lo_hz", "need 0 <= band_lo_hz < band_hi_hz");
        noise.band_lo = angular_from_hz(*lo);
        noise.band_hi = angular_from_hz(*hi);
      }
    }
    cfg.drive.noise = noise;
  }

  if (const auto n = r.number("n_atoms", true)) {
    if (!(*n >= 1.0)) r.issue(ConfigIssueKind::InvalidValue, "n_atoms", "must be >= 1");
    cfg.n_atoms = *n;
  }

  if (const auto mc = r.text("mass_convention", false)) {
    MassConvention c;
    if (parse_mass_convention(*mc, c))
      cfg.mass_convention = c;
    else
      r.issue(ConfigIssueKind::UnknownMassConvention, "mass_convention",
              "'" + *mc + "' (expected per_atom or total_condensate)");
  }

  if (const auto gp = r.number("solver.grid_points", false)) {
    if (*gp != std::floor(*gp) || *gp < 64 || !is_power_of_two(static_cast<long>(*gp)))
      r.issue(ConfigIssueKind::InvalidValue, "solver.grid_points", "must be a power of two >= 64");
    else
      cfg.solver.grid_points = static_cast<int>(*gp);
  }
  if (const auto hw = r.number("solver.domain_halfwidth_m", false)) {
    if (!(*hw > 0.0)) r.issue(ConfigIssueKind::InvalidValue, "solver.domain_halfwidth_m", "must be > 0");
    cfg.solver.domain_halfwidth = *hw;
  }
  if (const auto dt = r.number("solver.dt_s", false)) {
    if (!(*dt > 0.0)) r.issue(ConfigIssueKind::InvalidValue, "solver.dt_s", "must be > 0");
    cfg.solver.dt = *dt;
  }
  if (const auto te = r.number("solver.t_end_s", false)) {
    if (!(*te > 0.0)) r.issue(ConfigIssueKind::InvalidValue, "solver.t_end_s", "must be > 0");
    cfg.solver.t_end = *te;
  }
  if (const auto tol = r.number("solver.imag_time_tol", false)) {
    if (!(*tol > 0.0)) r.issue(ConfigIssueKind::InvalidValue, "solver.imag_time_tol", "must be > 0");
    cfg.solver.imag_time_tol = *tol;
  }
  if (const auto ms = r.number("solver.max_imag_steps", false)) {
    if (!(*ms >= 1.0)) r.issue(ConfigIssueKind::InvalidValue, "solver.max_imag_steps", "must be >= 1");
    cfg.solver.max_imag_steps = static_cast<int>(*ms);
  }

  if (const auto fmt = r.text("output.format", false)) {
    if (*fmt != "csv" && *fmt != "json")
      r.issue(ConfigIssueKind::InvalidValue, "output.format", "expected csv or json");
    cfg.output.format = *fmt;
  }
  if (const auto path = r.text("output.path", false)) cfg.output.path = *path;

  if (!r.issues().empty()) throw ConfigError(std::move(r.issues()));
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["species"] = {{"name", cfg.species.name},
                  {"atomic_mass_kg", cfg.species.atomic_mass},
                  {"scattering_length_m", cfg.species.scattering_length}};
  j["trap"] = {{"omega_x_hz", hz_from_angular(cfg.trap.omega_x)},
               {"omega_y_hz", hz_from_angular(cfg.trap.omega_y)},
               {"omega_z_hz", hz_from_angular(cfg.trap.omega_z)}};
  json drive = {{"amplitude_m", cfg.drive.amplitude},
                {"frequency_hz", hz_from_angular(cfg.drive.angular_frequency)},
                {"phase_rad", cfg.drive.phase}};
  if (cfg.drive.noise) {
    const auto& n = *cfg.drive.noise;
    json noise = {{"kind", n.kind == NoiseKind::White ? "white" : "band_limited"},
                  {"level", n.accel_psd_level},
                  {"seed", n.seed}};
    if (n.kind == NoiseKind::BandLimited) {
      noise["band_lo_hz"] = hz_from_angular(n.band_lo);
      noise["band_hi_hz"] = hz_from_angular(n.band_hi);
    }
    drive["noise"] = noise;
  }
  j["drive"] = drive;
  j["n_atoms"] = cfg.n_atoms;
  if (cfg.mass_convention) j["mass_convention"] = to_string(*cfg.mass_convention);
  json solver = {{"grid_points", cfg.solver.grid_points},
                 {"dt_s", cfg.solver.dt},
                 {"t_end_s", cfg.solver.t_end},
                 {"imag_time_tol", cfg.solver.imag_time_tol},
                 {"max_imag_steps", cfg.solver.max_imag_steps}};
  if (cfg.solver.domain_halfwidth) solver["domain_halfwidth_m"] = *cfg.solver.domain_halfwidth;
  j["solver"] = solver;
  j["output"] = {{"format", cfg.output.format}, {"path", cfg.output.path}};
  return j;
}

}  // namespace shaken_trap

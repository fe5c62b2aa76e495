#include "shaken_trap/harness.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "shaken_trap/drive.hpp"
#include "shaken_trap/gpe.hpp"
#include "shaken_trap/perturbation.hpp"

extern char** environ;

namespace shaken_trap {

using nlohmann::json;

// ---------------------------------------------------------------- tables

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::string cell_text(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>)
          return format_number(v);
        else if constexpr (std::is_same_v<T, long long>)
          return std::to_string(v);
        else if constexpr (std::is_same_v<T, bool>)
          return v ? "true" : "false";
        else
          return v;
      },
      c);
}

}  // namespace

void Table::write_csv(std::ostream& os) const {
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << '\n';
  }
}

json Table::to_json() const {
  json arr = json::array();
  for (const auto& row : rows) {
    json rec = json::object();
    for (std::size_t i = 0; i < row.size(); ++i)
      std::visit([&](const auto& v) { rec[columns[i]] = v; }, row[i]);
    arr.push_back(std::move(rec));
  }
  return arr;
}

void Table::write(std::ostream& os, const std::string& format) const {
  if (format == "json")
    os << to_json().dump(2) << '\n';
  else
    write_csv(os);
}

// ---------------------------------------------------------------- sweeps

std::vector<double> SweepSpec::values() const {
  if (n < 2) throw ConfigError(ConfigIssueKind::InvalidValue, parameter, "sweep needs n >= 2");
  if (!(lo < hi)) throw ConfigError(ConfigIssueKind::InvalidValue, parameter, "sweep needs lo < hi");
  if (scale == SweepScale::Log && !(lo > 0.0))
    throw ConfigError(ConfigIssueKind::InvalidValue, parameter, "log sweep needs lo > 0");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(n - 1);
    if (scale == SweepScale::Log)
      out[i] = std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
    else
      out[i] = lo + f * (hi - lo);
  }
  // endpoints are exact
  out.front() = lo;
  out.back() = hi;
  return out;
}

SweepSpec parse_sweep_range(const std::string& text, std::string parameter, SweepScale scale) {
  SweepSpec spec{std::move(parameter), scale};
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? a : text.find(':', a + 1);
  if (b == std::string::npos)
    throw ConfigError(ConfigIssueKind::InvalidValue, spec.parameter, "expected lo:hi:n, got '" + text + "'");
  try {
    std::size_t used = 0;
    spec.lo = std::stod(text.substr(0, a), &used);
    spec.hi = std::stod(text.substr(a + 1, b - a - 1), &used);
    spec.n = std::stoi(text.substr(b + 1), &used);
  } catch (const std::exception&) {
    throw ConfigError(ConfigIssueKind::InvalidValue, spec.parameter, "expected lo:hi:n, got '" + text + "'");
  }
  spec.values();  // validates
  return spec;
}

// ---------------------------------------------------------------- presets

namespace {

// Figure presets: isotropic 151 Hz trap, h f = 1e-31 J.
constexpr const char* kPresetFig2Left = R"({
  "description": "Density ratio trace, N0 = 1000, 1 cm amplitude, 1 kHz drive, total-condensate mass in the drive term.",
  "species": {"name": "Rb87"},
  "trap": {"omega_x_hz": 151.0, "omega_y_hz": 151.0, "omega_z_hz": 151.0},
  "drive": {"amplitude_m": 0.01, "frequency_hz": 1000.0, "phase_rad": 0.0},
  "n_atoms": 1000,
  "mass_convention": "total_condensate",
  "tf_ratio": {"probe_z_m": 1e-6, "mu_model": "standard_tf", "t_end_s": 0.002, "dt_s": 2.5e-5}
})";

constexpr const char* kPresetFig2Right = R"({
  "description": "Density ratio trace, N0 = 1e6, otherwise as fig2-left.",
  "species": {"name": "Rb87"},
  "trap": {"omega_x_hz": 151.0, "omega_y_hz": 151.0, "omega_z_hz": 151.0},
  "drive": {"amplitude_m": 0.01, "frequency_hz": 1000.0, "phase_rad": 0.0},
  "n_atoms": 1000000,
  "mass_convention": "total_condensate",
  "tf_ratio": {"probe_z_m": 1e-6, "mu_model": "standard_tf", "t_end_s": 0.002, "dt_s": 2.5e-5}
})";

constexpr const char* kPresetFig2Calibrated = R"({
  "description": "Probe chosen so that the N0 = 1000 trace peaks 0.5% above one under the standard TF chemical potential; the N0 = 1e6 prediction is reported next to the 50% figure for comparison.",
  "species": {"name": "Rb87"},
  "trap": {"omega_x_hz": 151.0, "omega_y_hz": 151.0, "omega_z_hz": 151.0},
  "drive": {"amplitude_m": 0.01, "frequency_hz": 1000.0, "phase_rad": 0.0},
  "n_atoms": 1000,
  "mass_convention": "total_condensate",
  "tf_ratio": {"mu_model": "standard_tf", "t_end_s": 0.002, "dt_s": 2.5e-5, "calibrate_peak": 0.005, "compare_n_atoms": 1000000}
})";

constexpr const char* kPresetFig3 = R"({
  "description": "Ensemble-averaged absorbed power for Rb-87, 1 kHz drive, per-atom mass.",
  "species": {"name": "Rb87"},
  "trap": {"omega_x_hz": 151.0, "omega_y_hz": 151.0, "omega_z_hz": 151.0},
  "drive": {"amplitude_m": 0.01, "frequency_hz": 1000.0, "phase_rad": 0.0},
  "n_atoms": 1,
  "mass_convention": "per_atom",
  "power": {"sweep_amplitude": "1e-4:1e-1:31"}
})";

constexpr const char* kPresetLambshift = R"({
  "description": "Lamb-shift estimate for 1e6 Rb-87 atoms at 2 kHz; L = 10 um as a laboratory-scale length.",
  "species": {"name": "Rb87"},
  "trap": {"omega_x_hz": 2000.0, "omega_y_hz": 2000.0, "omega_z_hz": 2000.0},
  "drive": {"amplitude_m": 0.0, "frequency_hz": 1000.0},
  "n_atoms": 1000000,
  "lambshift": {"n_atoms": 1000000, "omega_hz": 2000.0, "length_m": 1e-5, "target_ratio": 0.005}
})";

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig2-left", "fig2-right", "fig2-calibrated", "fig3-default", "lambshift-sec2"};
}

std::optional<json> preset_document(const std::string& name) {
  const char* text = nullptr;
  if (name == "fig2-left") text = kPresetFig2Left;
  else if (name == "fig2-right") text = kPresetFig2Right;
  else if (name == "fig2-calibrated") text = kPresetFig2Calibrated;
  else if (name == "fig3-default") text = kPresetFig3;
  else if (name == "lambshift-sec2") text = kPresetLambshift;
  if (!text) return std::nullopt;
  return json::parse(text);
}

// ---------------------------------------------------------------- config assembly

void set_path(json& doc, const std::string& dotted, const json& value) {
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot - start);
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

bool has_path(const json& doc, const std::string& dotted) {
  const json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot - start);
    if (!node->is_object() || !node->contains(key)) return false;
    node = &(*node)[key];
    if (dot == std::string::npos) return true;
    start = dot + 1;
  }
}

void apply_env_overrides(json& doc, const std::map<std::string, std::string>& env) {
  static const std::string prefix = "SHAKEN_TRAP_";
  for (const auto& [name, raw] : env) {
    if (name.rfind(prefix, 0) != 0 || name.size() == prefix.size()) continue;
    std::string path;
    const std::string rest = name.substr(prefix.size());
    for (std::size_t i = 0; i < rest.size(); ++i) {
      if (rest.compare(i, 2, "__") == 0) {
        path += '.';
        ++i;
      } else {
        path += static_cast<char>(std::tolower(static_cast<unsigned char>(rest[i])));
      }
    }
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    set_path(doc, path, value);
  }
}

std::map<std::string, std::string> current_environment() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq != std::string::npos) env.emplace(entry.substr(0, eq), entry.substr(eq + 1));
  }
  return env;
}

std::string canonical_hash(const json& doc) {
  // keys sorted, doubles in shortest round-trip form
  const std::string bytes = doc.dump();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string config_hash(const ExperimentConfig& cfg, const json& run_params) {
  return canonical_hash({{"config", to_json(cfg)}, {"run", run_params}});
}

// ---------------------------------------------------------------- builders

Table power_table(const ExperimentConfig& cfg, const std::vector<double>& amplitudes_m,
                  const std::vector<double>& frequencies_hz) {
  const double mass = cfg.perturbation_mass_or(MassConvention::PerAtom);
  Table t{{"a_m", "omega_rad_s", "power_w"}, {}};
  for (double a : amplitudes_m)
    for (double f : frequencies_hz) {
      const double omega = angular_from_hz(f);
      t.rows.push_back({a, omega, ensemble_averaged_power(mass, a, omega)});
    }
  return t;
}

Table emit_fig3(const ExperimentConfig& cfg, const std::vector<double>& amplitudes_m) {
  const double mass = cfg.perturbation_mass_or(MassConvention::PerAtom);
  Table t{{"a_mm", "power_w"}, {}};
  for (double a : amplitudes_m)
    t.rows.push_back({a * 1e3, ensemble_averaged_power(mass, a, cfg.drive.angular_frequency)});
  return t;
}

Table lambshift_table(const ExperimentConfig& cfg, double n_atoms, double omega_hz, double length_m) {
  const double omega = angular_from_hz(omega_hz);
  const auto shift = gravitational_lamb_shift(cfg.species.atomic_mass, n_atoms, omega, length_m);
  const double l_half_percent = lamb_shift_length_for_ratio(cfg.species.atomic_mass, n_atoms, omega, 0.005);
  return {{"n_atoms", "omega_rad_s", "length_m", "delta_v_j", "ratio", "length_for_ratio_0.005_m"},
          {{n_atoms, omega, length_m, shift.delta_v, shift.ratio, l_half_percent}}};
}

Table psd_table(const ExperimentConfig& cfg, const PsdRequest& req) {
  if (req.omega_points < 2 || !(req.omega_min < req.omega_max))
    throw ConfigError(ConfigIssueKind::InvalidValue, "--omega-points", "need >= 2 points and omega-min < omega-max");
  if (req.realizations < 1) throw ConfigError(ConfigIssueKind::InvalidValue, "--realizations", "must be >= 1");
  const double dt = cfg.solver.dt;
  const auto n = static_cast<Eigen::Index>(std::llround(cfg.solver.t_end / dt)) + 1;
  std::vector<SampledSignal> realizations;
  realizations.reserve(static_cast<std::size_t>(req.realizations));
  for (int r = 0; r < req.realizations; ++r) {
    DriveSpec drive = cfg.drive;
    if (drive.noise) drive.noise->seed = req.seed + static_cast<std::uint64_t>(r);
    realizations.push_back(synth_signal(drive, dt, n));
  }
  Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(req.omega_points, req.omega_min, req.omega_max);
  if (req.omega_min == -req.omega_max) {
    const Eigen::Index n_pts = grid.size();
    for (Eigen::Index k = 0; k < n_pts / 2; ++k) grid(n_pts - 1 - k) = -grid(k);
    if (n_pts % 2 == 1) grid(n_pts / 2) = 0.0;
  }
  const auto s = psd_estimate(realizations, grid);
  Table t{{"omega_rad_s", "S_value"}, {}};
  for (Eigen::Index k = 0; k < grid.size(); ++k) t.rows.push_back({grid(k), s.value()(k)});
  return t;
}

Table tf_ratio_table(const DensityTrace& trace) {
  Table t{{"t_s", "ratio", "beyond_tf"}, {}};
  for (std::size_t k = 0; k < trace.times.size(); ++k)
    t.rows.push_back({trace.times[k], trace.ratio[k], static_cast<bool>(trace.beyond_tf[k])});
  return t;
}

double default_probe_z(const ExperimentConfig& cfg, const MuModel& mu) {
  const double mu_j = chemical_potential(mu, cfg.n_atoms, cfg.trap, cfg.species);
  return 0.5 * tf_radius_z(mu_j, cfg.species, cfg.trap);
}

ProbeCalibration calibrate_probe(const ExperimentConfig& cfg, double target, double t_end, double dt) {
  ProbeCalibration c{};
  c.n_small = cfg.n_atoms;
  c.n_large = 1e6;
  const auto mu_model = MuModel::standard();
  c.mu_small = chemical_potential(mu_model, c.n_small, cfg.trap, cfg.species);
  const double drive_term = cfg.perturbation_mass_or(MassConvention::TotalCondensate) * cfg.drive.peak_acceleration();
  const double trap_term = 0.5 * cfg.species.atomic_mass * cfg.trap.omega_z * cfg.trap.omega_z;
  // root of target * k z^2 + c z - target * mu = 0, written without cancellation
  c.probe_z = 2.0 * target * c.mu_small /
              (drive_term + std::sqrt(drive_term * drive_term + 4.0 * target * target * trap_term * c.mu_small));
  c.peak_small = density_ratio_trace(cfg, c.probe_z, mu_model, t_end, dt).peak_deviation();
  ExperimentConfig large = cfg;
  large.n_atoms = c.n_large;
  c.peak_large_predicted = density_ratio_trace(large, c.probe_z, mu_model, t_end, dt).peak_deviation();
  c.scaling_exponent = std::log(c.peak_large_predicted / c.peak_small) / std::log(c.n_large / c.n_small);
  return c;
}

namespace {

double drive_period(const ExperimentConfig& cfg) { return 2.0 * std::numbers::pi / cfg.drive.angular_frequency; }

struct SweepRow {
  std::vector<Cell> cells;
};

std::vector<Cell> sweep_point(const json& doc, SweepTarget target, const TfRatioRequest& tf, double probe_z) {
  const auto cfg = validate_config(doc);
  switch (target) {
    case SweepTarget::Power: {
      const double mass = cfg.perturbation_mass_or(MassConvention::PerAtom);
      return {ensemble_averaged_power(mass, cfg.drive.amplitude, cfg.drive.angular_frequency)};
    }
    case SweepTarget::TfRatio: {
      const double period = drive_period(cfg);
      const auto trace = density_ratio_trace(cfg, probe_z, tf.mu_model, tf.t_end.value_or(2.0 * period),
                                             tf.dt.value_or(period / 40.0));
      const bool any_beyond = std::any_of(trace.beyond_tf.begin(), trace.beyond_tf.end(), [](bool b) { return b; });
      return {trace.peak_deviation(), any_beyond};
    }
    case SweepTarget::Lambshift: {
      const auto s = gravitational_lamb_shift(cfg.species.atomic_mass, cfg.n_atoms, cfg.trap.omega_z, 1e-5);
      return {s.delta_v, s.ratio};
    }
  }
  return {};
}

}  // namespace

Table sweep_table(const json& base_doc, const SweepSpec& spec, SweepTarget target, const TfRatioRequest& tf,
                  int jobs) {
  const auto base = validate_config(base_doc);
  if (!has_path(to_json(base), spec.parameter))
    throw ConfigError(ConfigIssueKind::UnknownParameterPath, spec.parameter, "not a configuration key");
  const auto values = spec.values();
  const double probe = target == SweepTarget::TfRatio ? tf.probe_z.value_or(default_probe_z(base, tf.mu_model)) : 0.0;

  std::vector<std::vector<Cell>> results(values.size());
  const std::size_t width = static_cast<std::size_t>(std::max(1, jobs));
  for (std::size_t begin = 0; begin < values.size(); begin += width) {
    const std::size_t end = std::min(values.size(), begin + width);
    std::vector<std::future<std::vector<Cell>>> batch;
    for (std::size_t i = begin; i < end; ++i) {
      json doc = base_doc;
      set_path(doc, spec.parameter, values[i]);
      if (width == 1)
        results[i] = sweep_point(doc, target, tf, probe);
      else
        batch.push_back(std::async(std::launch::async, [doc = std::move(doc), target, &tf, probe] {
          return sweep_point(doc, target, tf, probe);
        }));
    }
    for (std::size_t i = begin; i < end && width > 1; ++i) results[i] = batch[i - begin].get();
  }

  Table t;
  t.columns.push_back(spec.parameter);
  switch (target) {
    case SweepTarget::Power: t.columns.push_back("power_w"); break;
    case SweepTarget::TfRatio:
      t.columns.push_back("peak_ratio_deviation");
      t.columns.push_back("any_beyond_tf");
      break;
    case SweepTarget::Lambshift:
      t.columns.push_back("delta_v_j");
      t.columns.push_back("ratio");
      break;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::vector<Cell> row{values[i]};
    row.insert(row.end(), results[i].begin(), results[i].end());
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------- run

namespace {

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<double> sweep_or(const std::string& range, const std::string& name, double fallback) {
  if (range.empty()) return {fallback};
  return parse_sweep_range(range, name, SweepScale::Log).values();
}

MuModel mu_model_from(const std::string& kind_text, std::optional<double> mu_j, std::optional<double> tc) {
  MuModelKind kind;
  if (!parse_mu_model(kind_text, kind))
    throw ConfigError(ConfigIssueKind::InvalidValue, "--mu-model",
                      "'" + kind_text + "' (expected paper_prescription, standard_tf or explicit)");
  return MuModel{kind, mu_j, tc};
}

template <typename T>
std::optional<T> block_value(const json& doc, const std::string& block, const std::string& key) {
  if (!doc.contains(block) || !doc[block].is_object() || !doc[block].contains(key)) return std::nullopt;
  return doc[block][key].get<T>();
}

// Outputs held in memory until the whole run has succeeded.
struct PendingOutputs {
  std::vector<std::pair<std::string, std::string>> files;

  void add(std::string path, std::string content) { files.emplace_back(std::move(path), std::move(content)); }

  void flush() const {
    for (const auto& [path, content] : files) {
      std::ofstream os(path, std::ios::binary);
      if (!os) throw IoError("cannot write " + path);
      os << content;
      if (!os) throw IoError("failed writing " + path);
    }
  }
};

std::string snapshot_bytes(const WaveFunction& psi) {
  std::ostringstream os(std::ios::binary);
  write_snapshot(psi, os);
  return os.str();
}

Table observables_table(const std::vector<Observables>& rows) {
  Table t{{"t_s", "norm", "energy_j", "com_m", "peak_density", "width_m"}, {}};
  for (const auto& o : rows) t.rows.push_back({o.time, o.norm, o.energy, o.com, o.peak_density, o.width});
  return t;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cold atoms and condensates in a vertically shaken harmonic trap", "shaken_trap"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_path, format = "csv", preset;
  std::uint64_t seed = 0;
  int jobs = 1;
  auto* seed_opt = app.add_option("--seed", seed, "Base seed for noise realizations");
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_path, "Output file (stdout when absent)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--jobs", jobs, "Concurrent sweep points")->check(CLI::PositiveNumber);
  app.add_option("--preset", preset, "Embedded preset document")->check(CLI::IsMember(preset_names()));

  // power
  std::string sweep_amp, sweep_freq;
  bool fig3 = false;
  auto* power = app.add_subcommand("power", "Ensemble-averaged absorbed power");
  power->add_option("--sweep-amplitude", sweep_amp, "lo:hi:n log sweep of the amplitude in m");
  power->add_option("--sweep-frequency", sweep_freq, "lo:hi:n log sweep of the drive frequency in Hz");
  power->add_flag("--fig3", fig3, "Emit a_mm,power_w for a log-log plot");

  // psd
  std::optional<double> omega_min, omega_max;
  int omega_points = 401, realizations = 1;
  auto* psd = app.add_subcommand("psd", "Power spectral density estimate of the synthesized drive");
  psd->add_option("--omega-min", omega_min, "rad/s");
  psd->add_option("--omega-max", omega_max, "rad/s");
  psd->add_option("--omega-points", omega_points);
  psd->add_option("--realizations", realizations);

  // tf-ratio (its flags are shared with sweep)
  std::optional<double> probe_z, mu_j, tc, tf_t_end, tf_dt;
  std::string mu_model_text;
  auto add_tf_flags = [&](CLI::App* sub) {
    sub->add_option("--probe-z-m", probe_z, "Probe position on the axis");
    sub->add_option("--mu-model", mu_model_text, "paper_prescription | standard_tf | explicit");
    sub->add_option("--mu-j", mu_j, "Chemical potential for --mu-model explicit");
    sub->add_option("--tc-k", tc, "Critical temperature for --mu-model paper_prescription");
    sub->add_option("--t-end-s", tf_t_end);
    sub->add_option("--dt-s", tf_dt);
  };
  auto* tf_ratio = app.add_subcommand("tf-ratio", "Thomas-Fermi density ratio trace");
  add_tf_flags(tf_ratio);

  // gpe
  std::optional<int> grid_points;
  std::optional<double> halfwidth, gpe_dt, gpe_t_end;
  int snapshot_every = 0, output_stride = 0;
  auto add_gpe_flags = [&](CLI::App* sub) {
    sub->add_option("--grid-points", grid_points);
    sub->add_option("--halfwidth-m", halfwidth);
    sub->add_option("--dt-s", gpe_dt);
    sub->add_option("--t-end-s", gpe_t_end);
    sub->add_option("--snapshot-every", snapshot_every, "Steps between wavefunction snapshots");
  };
  auto* gpe_ground = app.add_subcommand("gpe-ground", "Imaginary-time ground state");
  add_gpe_flags(gpe_ground);
  auto* gpe_evolve = app.add_subcommand("gpe-evolve", "Driven real-time evolution from the ground state");
  add_gpe_flags(gpe_evolve);
  gpe_evolve->add_option("--output-stride", output_stride, "Steps between observable rows");

  // lambshift
  std::optional<double> ls_n, ls_omega_hz, ls_length;
  auto* lambshift = app.add_subcommand("lambshift", "Gravitational Lamb shift estimate");
  lambshift->add_option("--n-atoms", ls_n);
  lambshift->add_option("--omega-hz", ls_omega_hz);
  lambshift->add_option("--length-m", ls_length);

  // sweep
  std::string sweep_param, sweep_scale = "log", sweep_target = "power";
  double sweep_lo = 0, sweep_hi = 0;
  int sweep_n = 2;
  auto* sweep = app.add_subcommand("sweep", "Sweep one configuration value");
  sweep->add_option("--param", sweep_param, "Dotted configuration key")->required();
  sweep->add_option("--scale", sweep_scale)->check(CLI::IsMember({"linear", "log"}));
  sweep->add_option("--lo", sweep_lo)->required();
  sweep->add_option("--hi", sweep_hi)->required();
  sweep->add_option("--n", sweep_n)->required();
  sweep->add_option("--target", sweep_target)->check(CLI::IsMember({"power", "tf-ratio", "lambshift"}));
  add_tf_flags(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const std::string started = iso_now();
  try {
    // base document: preset, then file, then environment
    json doc = json::object();
    if (!preset.empty()) doc = *preset_document(preset);
    else if (lambshift->parsed() && config_path.empty()) doc = *preset_document("lambshift-sec2");
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw IoError("cannot read config file " + config_path);
      json file = json::parse(is, nullptr, false);
      if (file.is_discarded()) throw ConfigError(ConfigIssueKind::InvalidValue, config_path, "not valid JSON");
      doc.merge_patch(file);
    }
    apply_env_overrides(doc, current_environment());
    if (grid_points) set_path(doc, "solver.grid_points", *grid_points);
    if (halfwidth) set_path(doc, "solver.domain_halfwidth_m", *halfwidth);
    if (gpe_dt) set_path(doc, "solver.dt_s", *gpe_dt);
    if (gpe_t_end) set_path(doc, "solver.t_end_s", *gpe_t_end);

    const ExperimentConfig cfg = validate_config(doc);
    const std::string fmt = format;
    json run_params = json::object();
    PendingOutputs pending;
    Table table;
    std::string summary;

    auto tf_request = [&]() {
      TfRatioRequest req;
      const std::string kind = !mu_model_text.empty() ? mu_model_text
                               : block_value<std::string>(doc, "tf_ratio", "mu_model").value_or("standard_tf");
      req.mu_model = mu_model_from(kind, mu_j, tc);
      req.probe_z = probe_z ? probe_z : block_value<double>(doc, "tf_ratio", "probe_z_m");
      req.t_end = tf_t_end ? tf_t_end : block_value<double>(doc, "tf_ratio", "t_end_s");
      req.dt = tf_dt ? tf_dt : block_value<double>(doc, "tf_ratio", "dt_s");
      return req;
    };

    if (power->parsed()) {
      if (fig3) {
        const std::string range =
            !sweep_amp.empty() ? sweep_amp : block_value<std::string>(doc, "power", "sweep_amplitude").value_or("1e-4:1e-1:31");
        table = emit_fig3(cfg, parse_sweep_range(range, "--sweep-amplitude", SweepScale::Log).values());
        run_params["sweep_amplitude"] = range;
      } else {
        table = power_table(cfg, sweep_or(sweep_amp, "--sweep-amplitude", cfg.drive.amplitude),
                            sweep_or(sweep_freq, "--sweep-frequency", hz_from_angular(cfg.drive.angular_frequency)));
        run_params["sweep_amplitude"] = sweep_amp;
        run_params["sweep_frequency"] = sweep_freq;
      }
    } else if (psd->parsed()) {
      const double w = cfg.drive.angular_frequency;
      PsdRequest req{omega_min.value_or(-2.0 * w), omega_max.value_or(2.0 * w), omega_points, realizations,
                     seed_opt->count() ? seed : (cfg.drive.noise ? cfg.drive.noise->seed : 0)};
      table = psd_table(cfg, req);
      run_params = {{"omega_min", req.omega_min}, {"omega_max", req.omega_max}, {"omega_points", req.omega_points},
                    {"realizations", req.realizations}, {"seed", req.seed}};
    } else if (tf_ratio->parsed()) {
      auto req = tf_request();
      const double period = drive_period(cfg);
      const double t_end = req.t_end.value_or(2.0 * period);
      const double dt = req.dt.value_or(period / 40.0);
      const auto calibrate = block_value<double>(doc, "tf_ratio", "calibrate_peak");
      if (calibrate && !probe_z) {
        const auto cal = calibrate_probe(cfg, *calibrate, t_end, dt);
        req.probe_z = cal.probe_z;
        req.mu_model = MuModel::standard();
        json s = {{"calibrated_probe_z_m", cal.probe_z},
                  {"mu_j", cal.mu_small},
                  {"n_atoms_small", cal.n_small},
                  {"peak_ratio_deviation_small", cal.peak_small},
                  {"n_atoms_large", cal.n_large},
                  {"peak_ratio_deviation_large_predicted", cal.peak_large_predicted},
                  {"n_atoms_scaling_exponent", cal.scaling_exponent},
                  {"reported_increase_small", ProbeCalibration::kReportedSmall},
                  {"reported_increase_large", ProbeCalibration::kReportedLarge}};
        summary = s.dump(2);
      }
      const double probe = req.probe_z.value_or(default_probe_z(cfg, req.mu_model));
      table = tf_ratio_table(density_ratio_trace(cfg, probe, req.mu_model, t_end, dt));
      run_params = {{"probe_z_m", probe}, {"mu_model", to_string(req.mu_model.kind)}, {"t_end_s", t_end},
                    {"dt_s", dt}};
      if (req.mu_model.value_j) run_params["mu_j"] = *req.mu_model.value_j;
      if (req.mu_model.critical_temperature) run_params["tc_k"] = *req.mu_model.critical_temperature;
    } else if (gpe_ground->parsed() || gpe_evolve->parsed()) {
      const auto grid = grid_for(cfg);
      const auto ground = find_ground_state(cfg, grid);
      run_params = {{"grid_points", grid.n_points}, {"halfwidth_m", grid.halfwidth}};
      if (gpe_ground->parsed()) {
        table = observables_table({observables(ground.psi, cfg)});
        if (snapshot_every > 0 && !out_path.empty()) pending.add(out_path + ".ground.bin", snapshot_bytes(ground.psi));
      } else {
        const auto n_steps = std::llround(cfg.solver.t_end / cfg.solver.dt);
        EvolveOptions opts;
        opts.output_stride = output_stride > 0 ? output_stride : static_cast<int>(std::max<long long>(1, n_steps / 2000));
        opts.snapshot_every = snapshot_every;
        if (snapshot_every > 0 && !out_path.empty()) {
          opts.on_snapshot = [&](const WaveFunction& psi) {
            const auto step = std::llround(psi.time / cfg.solver.dt);
            pending.add(out_path + ".snap." + std::to_string(step) + ".bin", snapshot_bytes(psi));
          };
        }
        table = observables_table(evolve(ground.psi, cfg, opts).samples);
        run_params["output_stride"] = opts.output_stride;
      }
      run_params["snapshot_every"] = snapshot_every;
    } else if (lambshift->parsed()) {
      const double n = ls_n.value_or(block_value<double>(doc, "lambshift", "n_atoms").value_or(cfg.n_atoms));
      const double f = ls_omega_hz.value_or(
          block_value<double>(doc, "lambshift", "omega_hz").value_or(hz_from_angular(cfg.trap.omega_z)));
      const auto length = ls_length ? ls_length : block_value<double>(doc, "lambshift", "length_m");
      if (!length) throw ConfigError(ConfigIssueKind::MissingField, "--length-m");
      table = lambshift_table(cfg, n, f, *length);
      run_params = {{"n_atoms", n}, {"omega_hz", f}, {"length_m", *length}};
    } else if (sweep->parsed()) {
      const SweepSpec spec{sweep_param, sweep_scale == "log" ? SweepScale::Log : SweepScale::Linear, sweep_lo,
                           sweep_hi, sweep_n};
      const SweepTarget target = sweep_target == "power"      ? SweepTarget::Power
                                 : sweep_target == "tf-ratio" ? SweepTarget::TfRatio
                                                              : SweepTarget::Lambshift;
      table = sweep_table(doc, spec, target, tf_request(), jobs);
      run_params = {{"param", sweep_param}, {"scale", sweep_scale}, {"lo", sweep_lo}, {"hi", sweep_hi},
                    {"n", sweep_n}, {"target", sweep_target}};
    }

    std::ostringstream body;
    table.write(body, fmt);
    if (out_path.empty()) {
      out << body.str();
      if (!summary.empty()) out << summary << '\n';
      pending.flush();
      return kExitOk;
    }
    pending.add(out_path, body.str());
    if (!summary.empty()) pending.add(out_path + ".summary.json", summary + "\n");

    json manifest;
    manifest["config_hash"] = config_hash(cfg, run_params);
    manifest["seed"] = seed;
    manifest["tool_version"] = kToolVersion;
    manifest["subcommand"] = app.get_subcommands().front()->get_name();
    manifest["started"] = started;
    std::vector<std::string> outputs;
    for (const auto& [path, content] : pending.files) outputs.push_back(path);
    manifest["outputs"] = outputs;
    manifest["finished"] = iso_now();
    pending.add(out_path + ".manifest.json", manifest.dump(2) + "\n");
    pending.flush();
    if (!summary.empty()) out << summary << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace shaken_trap

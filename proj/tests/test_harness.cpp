#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "shaken_trap/errors.hpp"
#include "shaken_trap/harness.hpp"

using namespace shaken_trap;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "shaken_trap");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("shaken_trap_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) mx += std::log(x[k]), my += std::log(y[k]);
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (std::log(x[k]) - mx) * (std::log(y[k]) - my);
    sxx += (std::log(x[k]) - mx) * (std::log(x[k]) - mx);
  }
  return sxy / sxx;
}

json small_drive_doc() {
  return json::parse(R"({
    "trap": {"omega_x_hz": 151, "omega_y_hz": 151, "omega_z_hz": 151},
    "drive": {"amplitude_m": 1e-14, "frequency_hz": 1000},
    "n_atoms": 1000,
    "mass_convention": "total_condensate"
  })");
}

}  // namespace

TEST_SUITE("cli-harness") {
  TEST_CASE("numbers round trip through their text") {
    for (double v : {0.1, 1.0 / 3.0, 2.8115380763326186e-18, -1e-300, 6.02214076e23, 0.0}) {
      const auto s = format_number(v);
      CHECK(std::stod(s) == v);
      CHECK(s.find(',') == std::string::npos);
    }
    CHECK(format_number(1000.0) == "1000");
  }

  TEST_CASE("tables as CSV and JSON") {
    Table t{{"x", "flag", "label"}, {{1.5, true, std::string("a")}, {2.0, false, std::string("b")}}};
    std::ostringstream csv;
    t.write(csv, "csv");
    CHECK(csv.str() == "x,flag,label\n1.5,true,a\n2,false,b\n");
    const auto j = t.to_json();
    CHECK(j.size() == 2);
    CHECK(j[0]["x"] == 1.5);
    CHECK(j[1]["flag"] == false);
  }

  TEST_CASE("sweep specifications") {
    const auto two = SweepSpec{"p", SweepScale::Log, 1e-4, 1e-1, 2}.values();
    REQUIRE(two.size() == 2);
    CHECK(two[0] == 1e-4);
    CHECK(two[1] == 1e-1);
    const auto lin = SweepSpec{"p", SweepScale::Linear, 0.0, 1.0, 5}.values();
    CHECK(lin[2] == doctest::Approx(0.5));
    const auto log = parse_sweep_range("1e-4:1e-1:25", "a", SweepScale::Log).values();
    CHECK(log.size() == 25);
    for (std::size_t k = 1; k < log.size(); ++k) CHECK(log[k] > log[k - 1]);
    CHECK_THROWS_AS((SweepSpec{"p", SweepScale::Log, 0.0, 1.0, 3}.values()), ConfigError);
    CHECK_THROWS_AS((SweepSpec{"p", SweepScale::Linear, 1.0, 1.0, 3}.values()), ConfigError);
    CHECK_THROWS_AS((SweepSpec{"p", SweepScale::Linear, 0.0, 1.0, 1}.values()), ConfigError);
    CHECK_THROWS_AS(parse_sweep_range("1:2", "a", SweepScale::Log), ConfigError);
    CHECK_THROWS_AS(parse_sweep_range("x:2:3", "a", SweepScale::Log), ConfigError);
  }

  TEST_CASE("every preset validates") {
    for (const auto& name : preset_names()) {
      const auto doc = preset_document(name);
      REQUIRE(doc);
      CHECK_NOTHROW(validate_config(*doc));
    }
    CHECK_FALSE(preset_document("fig9"));
  }

  TEST_CASE("environment overrides nest on double underscores") {
    json doc = small_drive_doc();
    apply_env_overrides(doc, {{"SHAKEN_TRAP_DRIVE__AMPLITUDE_M", "0.02"},
                              {"SHAKEN_TRAP_SPECIES__NAME", "Na23"},
                              {"SHAKEN_TRAP_N_ATOMS", "5000"},
                              {"OTHER_DRIVE__AMPLITUDE_M", "9"}});
    CHECK(doc["drive"]["amplitude_m"] == 0.02);
    CHECK(doc["species"]["name"] == "Na23");
    CHECK(doc["n_atoms"] == 5000);
    const auto cfg = validate_config(doc);
    CHECK(cfg.drive.amplitude == 0.02);
    CHECK(cfg.species.name == "Na23");
  }

  TEST_CASE("dotted paths") {
    json doc = json::object();
    set_path(doc, "solver.grid_points", 256);
    CHECK(doc["solver"]["grid_points"] == 256);
    CHECK(has_path(doc, "solver.grid_points"));
    CHECK_FALSE(has_path(doc, "solver.dt_s"));
    CHECK_FALSE(has_path(doc, "solver.grid_points.x"));
  }

  TEST_CASE("config hash follows meaning, not spelling") {
    json a = small_drive_doc();
    json b = json::parse(R"({
      "n_atoms": 1000.0,
      "mass_convention": "total_condensate",
      "drive": {"frequency_hz": 1000.0, "amplitude_m": 1e-14, "phase_rad": 0},
      "trap": {"omega_z_hz": 151.0, "omega_y_hz": 151, "omega_x_hz": 151, "unused": 3}
    })");
    const json run = {{"seed", 1}};
    CHECK(config_hash(validate_config(a), run) == config_hash(validate_config(b), run));
    CHECK(config_hash(validate_config(a), run).size() == 64);
    json c = a;
    c["drive"]["amplitude_m"] = 2e-14;
    CHECK(config_hash(validate_config(a), run) != config_hash(validate_config(c), run));
    CHECK(config_hash(validate_config(a), run) != config_hash(validate_config(a), {{"seed", 2}}));
    // digest of the compact dump {"a":1,"b":[1.5,"x"]}, keys given out of order
    CHECK(canonical_hash(json::parse(R"({"b": [1.5, "x"], "a": 1})")) ==
          "253252306831c7a53e616d2fac19ec1f21555d2c739d3366d5fa6399d3cce7be");
  }

  TEST_CASE("fig3 output: row count, ordering, slope") {
    const auto r = run_cli({"--preset", "fig3-default", "power", "--fig3", "--sweep-amplitude", "1e-4:1e-1:25"});
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 26);
    CHECK(rows[0] == std::vector<std::string>{"a_mm", "power_w"});
    std::vector<double> a, p;
    for (std::size_t k = 1; k < rows.size(); ++k) {
      a.push_back(std::stod(rows[k][0]));
      p.push_back(std::stod(rows[k][1]));
      CHECK(p.back() > 0.0);
      if (k > 1) CHECK(a[k - 1] > a[k - 2]);
    }
    CHECK(fitted_slope(a, p) == doctest::Approx(2.0).epsilon(1e-9));
    const auto cfg = validate_config(*preset_document("fig3-default"));
    const auto single = emit_fig3(cfg, {0.01, 0.001});
    CHECK(std::get<double>(single.rows[0][1]) == doctest::Approx(2.8115e-18).epsilon(1e-4));
    CHECK(std::get<double>(single.rows[1][1]) == doctest::Approx(2.8115e-20).epsilon(1e-4));
  }

  TEST_CASE("exit codes and clean failure") {
    const auto dir = scratch_dir("exit");
    const auto out = (dir / "o.csv").string();
    auto r = run_cli({"--config", (dir / "missing.json").string(), "--out", out, "power"});
    CHECK(r.code == 3);
    CHECK(fs::is_empty(dir));

    std::ofstream(dir / "bad.json") << R"({"trap": {"omega_x_hz": 1, "omega_y_hz": 1, "omega_z_hz": 1},
                                          "drive": {"amplitude_m": 0.01, "frequency_hz": -5}, "n_atoms": 1})";
    r = run_cli({"--config", (dir / "bad.json").string(), "--out", out, "power"});
    CHECK(r.code == 1);
    CHECK(r.err.find("drive.frequency_hz") != std::string::npos);
    CHECK_FALSE(fs::exists(out));

    std::ofstream(dir / "coarse.json") << R"({"trap": {"omega_x_hz": 1000, "omega_y_hz": 1000, "omega_z_hz": 100},
                                             "drive": {"amplitude_m": 0, "frequency_hz": 1000}, "n_atoms": 1000,
                                             "species": {"name": "Rb87", "scattering_length_m": 0},
                                             "solver": {"grid_points": 256, "dt_s": 1e-3, "t_end_s": 0.01}})";
    r = run_cli({"--config", (dir / "coarse.json").string(), "--out", out, "gpe-evolve"});
    CHECK(r.code == 2);
    CHECK_FALSE(fs::exists(out));

    r = run_cli({"power", "--no-such-flag"});
    CHECK(r.code == 1);
    r = run_cli({"--preset", "fig2-left", "sweep", "--param", "drive.nothing", "--lo", "1", "--hi", "2", "--n", "2"});
    CHECK(r.code == 1);
    CHECK(r.err.find("UnknownParameterPath") != std::string::npos);
    fs::remove_all(dir);
  }

  TEST_CASE("manifest and determinism") {
    const auto dir = scratch_dir("determinism");
    std::ofstream(dir / "noise.json") << R"({"trap": {"omega_x_hz": 151, "omega_y_hz": 151, "omega_z_hz": 151},
        "drive": {"amplitude_m": 0.001, "frequency_hz": 1000, "noise": {"kind": "white", "level": 50.0, "seed": 4}},
        "n_atoms": 1, "solver": {"dt_s": 2e-5, "t_end_s": 0.02}})";
    auto once = [&](const std::string& name) {
      const auto out = (dir / name).string();
      const auto r = run_cli({"--config", (dir / "noise.json").string(), "--seed", "17", "--out", out, "psd",
                              "--realizations", "4", "--omega-points", "64"});
      REQUIRE(r.code == 0);
      return out;
    };
    const auto a = once("a.csv");
    const auto b = once("b.csv");
    CHECK(slurp(a) == slurp(b));
    const auto rows = parse_csv(slurp(a));
    CHECK(rows[0] == std::vector<std::string>{"omega_rad_s", "S_value"});
    CHECK(rows.size() == 65);
    const auto manifest = json::parse(slurp(a + ".manifest.json"));
    CHECK(manifest["seed"] == 17);
    CHECK(manifest["tool_version"] == kToolVersion);
    CHECK(manifest["config_hash"] == json::parse(slurp(b + ".manifest.json"))["config_hash"]);
    CHECK(manifest.contains("started"));
    CHECK(manifest.contains("finished"));
    CHECK(manifest["outputs"][0] == a);

    const auto r = run_cli({"--config", (dir / "noise.json").string(), "--seed", "18", "--out",
                            (dir / "c.csv").string(), "psd", "--realizations", "4", "--omega-points", "64"});
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "c.csv") != slurp(a));
    CHECK(json::parse(slurp((dir / "c.csv.manifest.json").string()))["config_hash"] != manifest["config_hash"]);
    fs::remove_all(dir);
  }

  TEST_CASE("sweeps: ordering, concurrency, scaling columns") {
    SweepSpec spec{"n_atoms", SweepScale::Log, 1e3, 1e6, 7};
    TfRatioRequest tf{1e-8, MuModel::standard(), std::nullopt, std::nullopt};
    const auto serial = sweep_table(small_drive_doc(), spec, SweepTarget::TfRatio, tf, 1);
    const auto parallel = sweep_table(small_drive_doc(), spec, SweepTarget::TfRatio, tf, 4);
    std::ostringstream s1, s2;
    serial.write_csv(s1);
    parallel.write_csv(s2);
    CHECK(s1.str() == s2.str());
    REQUIRE(serial.rows.size() == 7);
    for (std::size_t k = 1; k < serial.rows.size(); ++k) {
      CHECK(std::get<double>(serial.rows[k][0]) > std::get<double>(serial.rows[k - 1][0]));
      CHECK(std::get<double>(serial.rows[k][1]) >= std::get<double>(serial.rows[k - 1][1]));
    }

    SweepSpec freq{"drive.frequency_hz", SweepScale::Log, 100.0, 1e4, 9};
    const auto power = sweep_table(small_drive_doc(), freq, SweepTarget::Power, tf, 2);
    std::vector<double> f, p;
    for (const auto& row : power.rows) f.push_back(std::get<double>(row[0])), p.push_back(std::get<double>(row[1]));
    CHECK(fitted_slope(f, p) == doctest::Approx(3.0).epsilon(1e-9));

    SweepSpec two{"drive.amplitude_m", SweepScale::Linear, 1e-3, 2e-3, 2};
    const auto t2 = sweep_table(small_drive_doc(), two, SweepTarget::Power, tf, 1);
    REQUIRE(t2.rows.size() == 2);
    CHECK(std::get<double>(t2.rows[0][0]) == 1e-3);
    CHECK(std::get<double>(t2.rows[1][0]) == 2e-3);

    try {
      sweep_table(small_drive_doc(), SweepSpec{"drive.colour", SweepScale::Linear, 0, 1, 2}, SweepTarget::Power, tf, 1);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.has(ConfigIssueKind::UnknownParameterPath, "drive.colour"));
    }
  }

  TEST_CASE("tf-ratio and lambshift subcommands") {
    auto r = run_cli({"--preset", "fig2-left", "tf-ratio"});
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(r.out);
    CHECK(rows[0] == std::vector<std::string>{"t_s", "ratio", "beyond_tf"});
    CHECK(rows.size() > 10);

    r = run_cli({"lambshift", "--n-atoms", "1e6", "--omega-hz", "2000", "--length-m", "1e-5"});
    REQUIRE(r.code == 0);
    const auto ls = parse_csv(r.out);
    CHECK(std::stod(ls[1][3]) == doctest::Approx(1.9e-44).epsilon(0.01));
    CHECK(std::stod(ls[1][5]) == doctest::Approx(5.92).epsilon(0.01));

    r = run_cli({"--format", "json", "--preset", "fig3-default", "power"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)[0].contains("power_w"));
  }
}

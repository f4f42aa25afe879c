#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>

#include "CLI11.hpp"
#include "zrp/ensembles.hpp"
#include "zrp/errors.hpp"
#include "zrp/pde.hpp"
#include "zrp/profile.hpp"
#include "zrp/rates.hpp"
#include "zrp/simulate.hpp"
#include "zrp/thermo.hpp"
#include "zrp/verify.hpp"

namespace zrp::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string> kCommands = {"phase-diagram", "simulate", "solve-pde",
                                            "sweep",         "equivalence", "master"};

json default_profile() { return {{"rho1", "0.5"}, {"rho2", "0.5"}}; }

/// Defaults of each command block; user values are merged on top.
json command_defaults(const std::string& command) {
  if (command == "phase-diagram") return {{"resolution", 64}};
  if (command == "simulate") {
    return {{"N", 64},           {"d", 1},
            {"times", {0.0}},    {"replicas", 1},
            {"profile", default_profile()},
            {"initial", nullptr},  // explicit configuration overrides the profile
            {"snapshot_files", "csv"},
            {"ell", nullptr},
            {"compare_master", false}};
  }
  if (command == "solve-pde") {
    return {{"M", 128},        {"d", 1},
            {"times", {0.1}},  {"safety", 0.9},
            {"route", "system"},
            {"profile", default_profile()},
            {"cfl_refresh", 100},
            {"breach_tolerance", 1e-8},
            {"fourier_check", false}};
  }
  if (command == "sweep") {
    return {{"N", {64, 128, 256}}, {"times", {0.05}}, {"replicas", 32}, {"ell", "sqrt"},
            {"M", 256},            {"d", 1},          {"safety", 0.9},
            {"profile", {{"rho1", "0.5 + 0.2*cos(2*pi*u)"}, {"rho2", "0.5"}}}};
  }
  if (command == "equivalence") return {{"N", {2, 3, 4, 5, 6}}, {"rho", {0.5, 0.5}}, {"d", 1}};
  if (command == "master") {
    return {{"N", 3},         {"d", 1},
            {"K", {2, 1}},    {"initial", nullptr},  // default: every particle on site 0
            {"times", {0.1, 0.5, 1.0, 5.0}},
            {"time_scale", "diffusive"}};
  }
  throw ConfigError("unknown command '" + command + "'");
}

/// Config block key of a command ("solve-pde" → "solve_pde").
std::string block_key(std::string command) {
  std::replace(command.begin(), command.end(), '-', '_');
  return command;
}

json resolve(const std::string& command, const json& config) {
  if (!config.is_object()) throw ConfigError("configuration must be a JSON object");
  json resolved = config;
  json base = {{"out", "zrp_out"}, {"threads", 1}, {"seed", nullptr}, {"rate", "linear"}};
  base.merge_patch(config);
  resolved = base;
  const std::string key = block_key(command);
  json block = command_defaults(command);
  if (config.contains(key)) {
    if (!config[key].is_object()) throw ConfigError("block '" + key + "' must be an object");
    for (auto& [k, v] : config[key].items()) {
      if (!block.contains(k)) throw ConfigError("unknown key '" + k + "' in block '" + key + "'");
      block[k] = v;
    }
  }
  resolved[key] = block;
  resolved["command"] = command;
  return resolved;
}

// ------------------------------------------------------------------ parsing

JumpRateSpec parse_rate(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "linear") return species_blind_rate(OneSpeciesRate::linear());
    if (s == "constant") return species_blind_rate(OneSpeciesRate::constant());
    throw ConfigError("unknown rate '" + s + "' (use an object for evans or table)");
  }
  if (!j.is_object() || !j.contains("family")) throw ConfigError("rate needs a 'family'");
  const std::string family = j["family"].get<std::string>();
  if (family == "linear") return species_blind_rate(OneSpeciesRate::linear());
  if (family == "constant") return species_blind_rate(OneSpeciesRate::constant());
  if (family == "evans") {
    if (!j.contains("b")) throw ConfigError("evans rate needs parameter 'b'");
    const double b = j["b"].get<double>();
    if (!(b > 0.0)) throw ConfigError("evans parameter b must be positive");
    return species_blind_rate(OneSpeciesRate::evans(b));
  }
  if (family == "table") {
    if (!j.contains("path")) throw ConfigError("table rate needs a 'path'");
    const fs::path path = j["path"].get<std::string>();
    if (!fs::is_regular_file(path)) throw ConfigError("rate table not found: " + path.string());
    return load_rate_table(path);
  }
  throw ConfigError("unknown rate family '" + family + "'");
}

std::vector<double> parse_times(const json& j) {
  if (!j.is_array()) throw ConfigError("'times' must be an array");
  std::vector<double> t = j.get<std::vector<double>>();
  if (t.empty()) throw ConfigError("empty t-grid");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] >= 0.0) || !std::isfinite(t[i]) || (i > 0 && !(t[i] > t[i - 1]))) {
      throw ConfigError("t-grid must be finite, non-negative and strictly increasing");
    }
  }
  return t;
}

template <class T>
T positive(const json& j, const char* name) {
  const T v = j.at(name).get<T>();
  if (!(v > T{0})) throw ConfigError(std::string("'") + name + "' must be positive");
  return v;
}

int dimension_of(const json& block) {
  const int d = block.at("d").get<int>();
  if (d < 1 || d > 3) throw ConfigError("'d' must be 1, 2 or 3");
  return d;
}

/// Parses and validates a profile on 1024 points: non-negative and strictly
/// sub-critical.
Profile parse_profile(const json& j, const Thermodynamics& thermo) {
  Profile p;
  try {
    p = Profile::from_json(j);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid profile: ") + e.what());
  }
  if (p.min_component(1024) < 0.0) throw ConfigError("profile takes negative values");
  if (const OneSpeciesThermo* base = thermo.species_blind()) {
    if (base->condensing() && !(p.max_l1(1024) < base->critical_density())) {
      throw ConfigError("profile is not sub-critical (max |rho|_1 = " +
                        std::to_string(p.max_l1(1024)) + ")");
    }
  } else {
    for (int i = 0; i < 1024; ++i) {
      if (!thermo.is_subcritical(p(i / 1024.0))) {
        throw ConfigError("profile is not sub-critical at u = " + std::to_string(i / 1024.0));
      }
    }
  }
  return p;
}

std::uint64_t required_seed(const json& config) {
  if (config.at("seed").is_null()) throw ConfigError("this command needs an explicit seed");
  return config.at("seed").get<std::uint64_t>();
}

unsigned threads_of(const json& config) {
  const int n = config.at("threads").get<int>();
  if (n < 1) throw ConfigError("'threads' must be at least 1");
  return static_cast<unsigned>(n);
}

std::vector<Counts> parse_configuration(const json& j, std::size_t sites) {
  if (!j.is_array() || j.size() != sites) {
    throw ConfigError("explicit configuration must list [k1, k2] for each of the " +
                      std::to_string(sites) + " sites");
  }
  std::vector<Counts> eta;
  for (const json& site : j) {
    if (!site.is_array() || site.size() != 2) throw ConfigError("site occupations are [k1, k2]");
    eta.push_back({site[0].get<Count>(), site[1].get<Count>()});
  }
  return eta;
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

// ------------------------------------------------------------------ commands

json cmd_phase_diagram(const json& config, const fs::path& out) {
  const json& block = config.at("phase_diagram");
  const int resolution = block.at("resolution").get<int>();
  if (resolution < 8) throw ConfigError("'resolution' must be at least 8");
  const Thermodynamics thermo(parse_rate(config.at("rate")));
  const PhaseDiagram diagram = thermo.phase_diagram(resolution);
  write_phase_diagram_csv(diagram, out / "phase_diagram.csv");
  json summary{{"condensing", diagram.condensing},
               {"samples", diagram.samples.size()},
               {"axis_critical_fugacity",
                {thermo.axis(0).critical_fugacity(), thermo.axis(1).critical_fugacity()}},
               {"axis_critical_density",
                {thermo.axis(0).critical_density(), thermo.axis(1).critical_density()}},
               {"files", {"phase_diagram.csv"}}};
  write_json(summary, out / "summary.json");
  return summary;
}

void cmd_simulate(const json& config, const fs::path& out, json& results) {
  const json& block = config.at("simulate");
  const Thermodynamics thermo(parse_rate(config.at("rate")));
  const Count side = positive<Count>(block, "N");
  const int d = dimension_of(block);
  const std::vector<double> times = parse_times(block.at("times"));
  const std::size_t replicas = positive<std::size_t>(block, "replicas");
  const std::uint64_t seed = required_seed(config);
  const Torus torus(side, d);
  const std::string files = block.at("snapshot_files").get<std::string>();
  if (files != "csv" && files != "binary" && files != "none") {
    throw ConfigError("'snapshot_files' must be csv, binary or none");
  }

  std::optional<std::vector<Counts>> fixed;
  std::unique_ptr<SlowlyVaryingProduct> product;
  if (!block.at("initial").is_null()) {
    fixed = parse_configuration(block.at("initial"), torus.sites());
  } else {
    product = std::make_unique<SlowlyVaryingProduct>(
        thermo, parse_profile(block.at("profile"), thermo), side, d);
  }
  const InitialSampler sampler = [&](std::uint64_t s, std::uint64_t r) {
    return fixed ? *fixed : product->sample(s, r);
  };
  RunOptions run_options;
  run_options.side = side;
  run_options.dimension = d;
  run_options.snapshot_times = times;
  run_options.seed = seed;
  run_options.replicas = replicas;
  run_options.threads = threads_of(config);
  const std::vector<TrajectoryRecord> records = run(thermo.rate(), sampler, run_options);

  json file_list = json::array();
  std::size_t frozen = 0;
  std::uint64_t events = 0;
  for (const TrajectoryRecord& rec : records) {
    frozen += rec.frozen ? 1 : 0;
    events += rec.events;
    if (files == "csv") {
      const std::string name = "replica_" + std::to_string(rec.replica) + ".csv";
      write_snapshots_csv(rec, out / name);
      file_list.push_back(name);
    } else if (files == "binary") {
      const std::string name = "replica_" + std::to_string(rec.replica) + ".bin";
      write_snapshots_binary(rec, out / name);
      file_list.push_back(name);
    }
  }
  if (!block.at("ell").is_null()) {
    const Count ell = block.at("ell").get<Count>();
    const fs::path path = out / "field_replica_0.csv";
    for (std::size_t k = 0; k < times.size(); ++k) {
      const auto field = empirical_density_field(torus, records.front().snapshots[k].eta, ell);
      write_field_csv(times[k], ell, field, path, k > 0);
    }
    file_list.push_back("field_replica_0.csv");
  }
  results["files"] = file_list;
  results["events"] = events;
  results["frozen_replicas"] = frozen;
  results["totals_replica_0"] = {records.front().totals.k1, records.front().totals.k2};

  if (block.at("compare_master").get<bool>()) {
    if (!fixed) throw ConfigError("compare_master needs an explicit 'initial' configuration");
    Counts totals;
    for (const Counts& k : *fixed) totals = {totals.k1 + k.k1, totals.k2 + k.k2};
    DistributionTable law = canonical_measure(thermo, side, d, totals);
    std::fill(law.probabilities.begin(), law.probabilities.end(), 0.0);
    law.probabilities[law.space->encode(*fixed)] = 1.0;
    const Generator generator(thermo.rate(), law.space);
    json tv = json::array();
    for (std::size_t k = 0; k < times.size(); ++k) {
      const DistributionTable exact =
          master_equation_evolve(generator, law, times[k], TimeScale::diffusive);
      const DistributionTable empirical = empirical_distribution(law.space, records, k);
      tv.push_back({{"t_macro", times[k]}, {"total_variation", empirical.total_variation(exact)}});
    }
    results["master_comparison"] = tv;
  }
  if (frozen > 0) {
    throw FrozenStateError(std::to_string(frozen) +
                           " replica(s) froze (zero total jump intensity)");
  }
}

double fourier_heat_solution(const ProfileComponent& c, double t, double u) {
  const double decay = std::exp(-4.0 * std::numbers::pi * std::numbers::pi * c.k * c.k * t);
  const double arg = 2.0 * std::numbers::pi * c.k * u;
  return c.a + decay * (c.b * std::cos(arg) + c.c * std::sin(arg));
}

void cmd_solve_pde(const json& config, const fs::path& out, json& results) {
  const json& block = config.at("solve_pde");
  const Thermodynamics thermo(parse_rate(config.at("rate")));
  PdeOptions options;
  options.M = positive<Count>(block, "M");
  options.dimension = dimension_of(block);
  options.safety = block.at("safety").get<double>();
  options.cfl_refresh = positive<std::size_t>(block, "cfl_refresh");
  options.breach_tolerance = block.at("breach_tolerance").get<double>();
  if (!(options.safety > 0.0 && options.safety <= 1.0)) throw ConfigError("'safety' must lie in (0, 1]");
  if (options.M < 3) throw ConfigError("'M' must be at least 3");
  const std::vector<double> times = parse_times(block.at("times"));
  const Profile profile = parse_profile(block.at("profile"), thermo);
  const std::string route = block.at("route").get<std::string>();
  const PdeField initial = PdeField::from_profile(profile, options.M, options.dimension);

  results["manifest"] = pde_manifest(route == "scalar"     ? "explicit-conservative-scalar"
                                     : route == "decoupled" ? "species-blind-decoupled"
                                                            : "explicit-conservative-system",
                                     options, 0.0, thermo.rate().describe());
  SystemSolution solution;
  if (route == "system") {
    solution = solve_system(thermo, initial, times, options);
  } else if (route == "decoupled" || route == "scalar") {
    const OneSpeciesThermo* base = thermo.species_blind();
    if (!base) throw ConfigError("route '" + route + "' needs a species-blind rate");
    if (route == "decoupled") {
      solution = solve_species_blind_decoupled(*base, initial, times, options);
    } else {
      ScalarField sum;
      sum.M = initial.M;
      sum.dimension = initial.dimension;
      for (std::size_t i = 0; i < initial.points(); ++i) {
        sum.rho.push_back(initial.rho1[i] + initial.rho2[i]);
      }
      const ScalarSolution scalar = solve_scalar(*base, sum, times, options);
      write_scalar_csv(scalar.trajectory, out / "field.csv");
      results["manifest"]["dt"] = scalar.trajectory.back().dt;
      results["steps"] = scalar.steps;
      results["files"] = {"field.csv"};
      return;
    }
  } else {
    throw ConfigError("'route' must be system, decoupled or scalar");
  }
  write_pde_csv(solution.trajectory, out / "field.csv");
  results["manifest"]["dt"] = solution.trajectory.back().dt;
  results["steps"] = solution.steps;
  results["invariant_region"] = solution.report.to_json();
  results["mass"] = {solution.trajectory.back().mass(0), solution.trajectory.back().mass(1)};
  results["initial_mass"] = {initial.mass(0), initial.mass(1)};
  results["files"] = {"field.csv"};

  if (block.at("fourier_check").get<bool>()) {
    const OneSpeciesRate* base = thermo.rate().species_blind_base();
    if (!base || base->kind() != OneSpeciesRate::Kind::linear) {
      throw ConfigError("fourier_check applies to the linear rate only");
    }
    json errors = json::array();
    const std::size_t M = options.M;
    for (const PdeField& f : solution.trajectory) {
      double err = 0.0;
      for (std::size_t i = 0; i < f.points(); ++i) {
        const double u = static_cast<double>(i % M) / M;
        err = std::max(err, std::abs(f.rho1[i] - fourier_heat_solution(profile.component(0), f.t, u)));
        err = std::max(err, std::abs(f.rho2[i] - fourier_heat_solution(profile.component(1), f.t, u)));
      }
      errors.push_back({{"t", f.t}, {"linf_error", err}});
    }
    results["fourier_check"] = errors;
  }
}

json cmd_sweep(const json& config, const fs::path& out) {
  const json& block = config.at("sweep");
  const Thermodynamics thermo(parse_rate(config.at("rate")));
  SweepOptions options;
  options.sides = block.at("N").get<std::vector<Count>>();
  if (options.sides.empty()) throw ConfigError("'N' list is empty");
  options.t_macro = parse_times(block.at("times"));
  options.replicas = positive<std::size_t>(block, "replicas");
  options.seed = required_seed(config);
  options.threads = threads_of(config);
  options.dimension = dimension_of(block);
  options.pde.M = positive<Count>(block, "M");
  options.pde.safety = block.at("safety").get<double>();
  const json& ell = block.at("ell");
  if (ell.is_string()) {
    if (ell.get<std::string>() != "sqrt") throw ConfigError("'ell' must be \"sqrt\" or an integer");
  } else {
    const Count fixed = ell.get<Count>();
    options.ell = [fixed](Count) { return fixed; };
  }
  for (Count n : options.sides) {
    if (2 * options.ell(n) + 1 > n) throw ConfigError("block 2*ell+1 exceeds N=" + std::to_string(n));
  }
  const Profile profile = parse_profile(block.at("profile"), thermo);
  const ConvergenceSweep sweep = hydrodynamic_sweep(thermo, profile, options);
  write_sweep_csv(sweep, out / "sweep.csv");
  json results = sweep.to_json();
  results["files"] = {"sweep.csv"};
  return results;
}

json cmd_equivalence(const json& config, const fs::path& out) {
  const json& block = config.at("equivalence");
  const Thermodynamics thermo(parse_rate(config.at("rate")));
  const std::vector<Count> sides = block.at("N").get<std::vector<Count>>();
  if (sides.empty()) throw ConfigError("'N' list is empty");
  const std::vector<double> rho = block.at("rho").get<std::vector<double>>();
  if (rho.size() != 2 || rho[0] < 0.0 || rho[1] < 0.0) throw ConfigError("'rho' must be [r1, r2] >= 0");
  const auto trace =
      equivalence_of_ensembles_trace(thermo, {rho[0], rho[1]}, sides, dimension_of(block));
  std::ofstream csv(out / "equivalence.csv");
  if (!csv) throw IoError("cannot write equivalence.csv");
  csv.precision(17);
  csv << "N,K1,K2,H_per_site\n";
  json points = json::array();
  bool decreasing = true;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& p = trace[i];
    csv << p.side << ',' << p.totals.k1 << ',' << p.totals.k2 << ',' << p.value << '\n';
    points.push_back({{"N", p.side}, {"K", {p.totals.k1, p.totals.k2}}, {"H_per_site", p.value}});
    if (i > 0 && !(p.value < trace[i - 1].value)) decreasing = false;
  }
  return {{"trace", points}, {"strictly_decreasing", decreasing}, {"files", {"equivalence.csv"}}};
}

json cmd_master(const json& config, const fs::path& out) {
  const json& block = config.at("master");
  const Thermodynamics thermo(parse_rate(config.at("rate")));
  const Count side = positive<Count>(block, "N");
  const int d = dimension_of(block);
  const auto K = block.at("K").get<std::vector<Count>>();
  if (K.size() != 2) throw ConfigError("'K' must be [K1, K2]");
  const std::vector<double> times = parse_times(block.at("times"));
  const std::string scale_name = block.at("time_scale").get<std::string>();
  if (scale_name != "raw" && scale_name != "diffusive") {
    throw ConfigError("'time_scale' must be raw or diffusive");
  }
  const TimeScale scale = scale_name == "raw" ? TimeScale::raw : TimeScale::diffusive;
  const Torus torus(side, d);
  std::vector<Counts> start(torus.sites());
  if (block.at("initial").is_null()) {
    start[0] = {K[0], K[1]};
  } else {
    start = parse_configuration(block.at("initial"), torus.sites());
    Counts sum;
    for (const Counts& k : start) sum = {sum.k1 + k.k1, sum.k2 + k.k2};
    if (sum.k1 != K[0] || sum.k2 != K[1]) throw ConfigError("'initial' does not carry K particles");
  }
  const DistributionTable canonical = canonical_measure(thermo, side, d, {K[0], K[1]});
  DistributionTable mu0 = canonical;
  std::fill(mu0.probabilities.begin(), mu0.probabilities.end(), 0.0);
  mu0.probabilities[mu0.space->encode(start)] = 1.0;
  const Generator generator(thermo.rate(), canonical.space);
  const std::vector<double> entropy =
      entropy_production_trace(generator, mu0, canonical, times, scale);

  std::ofstream csv(out / "master.csv");
  if (!csv) throw IoError("cannot write master.csv");
  csv.precision(17);
  csv << "t,relative_entropy,total_variation\n";
  json rows = json::array();
  json files = json::array({"master.csv"});
  for (std::size_t k = 0; k < times.size(); ++k) {
    const DistributionTable law = master_equation_evolve(generator, mu0, times[k], scale);
    const double tv = law.total_variation(canonical);
    csv << times[k] << ',' << entropy[k] << ',' << tv << '\n';
    const std::string name = "law_" + std::to_string(k) + ".json";
    law.save(out / name);
    files.push_back(name);
    rows.push_back({{"t", times[k]}, {"relative_entropy", entropy[k]}, {"total_variation", tv}});
  }
  return {{"states", canonical.space->size()},
          {"stationarity_residual", stationarity_residual(generator, canonical)},
          {"trace", rows},
          {"files", files}};
}

}  // namespace

int run_command(const std::string& command, json config) {
  json manifest{{"command", command}, {"config", config}};
  fs::path out = config.is_object() && config.contains("out") && config["out"].is_string()
                     ? fs::path(config["out"].get<std::string>())
                     : fs::path("zrp_out");
  json results = json::object();
  int code = kSuccess;
  std::string message;
  try {
    const json resolved = resolve(command, config);
    manifest["config"] = resolved;
    out = resolved.at("out").get<std::string>();
    fs::create_directories(out);
    if (command == "phase-diagram") {
      results = cmd_phase_diagram(resolved, out);
    } else if (command == "simulate") {
      cmd_simulate(resolved, out, results);
    } else if (command == "solve-pde") {
      cmd_solve_pde(resolved, out, results);
    } else if (command == "sweep") {
      results = cmd_sweep(resolved, out);
    } else if (command == "equivalence") {
      results = cmd_equivalence(resolved, out);
    } else {
      results = cmd_master(resolved, out);
    }
  } catch (const ConfigError& e) {
    code = kUsageError;
    message = e.what();
  } catch (const json::exception& e) {
    code = kUsageError;
    message = std::string("invalid configuration: ") + e.what();
  } catch (const FeasibilityError& e) {
    code = kUsageError;
    message = e.what();
  } catch (const IoError& e) {
    code = kUsageError;
    message = e.what();
  } catch (const DomainError& e) {
    code = kUsageError;
    message = e.what();
  } catch (const CriticalityError& e) {
    code = kNumericalAbort;
    message = e.what();
  } catch (const FrozenStateError& e) {
    code = kNumericalAbort;
    message = e.what();
  } catch (const DivergenceError& e) {
    code = kNumericalAbort;
    message = e.what();
  } catch (const std::exception& e) {
    code = kNumericalAbort;
    message = e.what();
  }
  manifest["status"] = code == kSuccess ? "ok" : code == kNumericalAbort ? "aborted" : "usage_error";
  manifest["exit_code"] = code;
  if (!message.empty()) manifest["abort_reason"] = message;
  manifest["results"] = results;
  try {
    fs::create_directories(out);
    write_json(manifest, out / "manifest.json");
  } catch (const std::exception& e) {
    std::cerr << "zrp: cannot write manifest: " << e.what() << '\n';
  }
  if (code != kSuccess) std::cerr << "zrp: " << message << '\n';
  return code;
}

int main(int argc, char** argv) {
  CLI::App app{"Two-species zero range process laboratory"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  app.add_option("command", command, "phase-diagram | simulate | solve-pde | sweep | equivalence | master")
      ->required()
      ->check(CLI::IsMember(kCommands));
  auto* config_opt = app.add_option("--config", config_path, "JSON configuration document");
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides 'out')");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides 'seed')");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads (overrides 'threads')");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kSuccess : kUsageError;
  }

  json config = json::object();
  if (*config_opt) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "zrp: configuration not found: " << config_path << '\n';
      return kUsageError;
    }
    try {
      config = json::parse(in);
    } catch (const json::exception& e) {
      std::cerr << "zrp: cannot parse configuration: " << e.what() << '\n';
      return kUsageError;
    }
    if (!config.is_object()) {
      std::cerr << "zrp: configuration must be a JSON object\n";
      return kUsageError;
    }
  }
  if (*out_opt) config["out"] = out_dir;
  if (*seed_opt) config["seed"] = seed;
  if (*threads_opt) config["threads"] = threads;
  return run_command(command, std::move(config));
}

}  // namespace zrp::cli

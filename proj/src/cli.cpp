#include "ctqkd/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ctqkd/analysis.hpp"
#include "ctqkd/format.hpp"
#include "ctqkd/report.hpp"
#include "ctqkd/session.hpp"

namespace ctqkd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": not a number: '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long out = 0;
  try {
    if (!v.empty() && v.front() != '-') out = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError(key + ": not a nonnegative integer: '" + v + "'");
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> items;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(trim(item));
  return items;
}

using Applier = std::function<void(const std::string& key, const std::string& v, CliConfig& c)>;

const std::map<std::string, Applier>& appliers() {
  static const std::map<std::string, Applier> table = {
      {"session.n_pulses", [](auto& k, auto& v, CliConfig& c) { c.session.n_pulses = to_u64(k, v); }},
      {"session.mu_coherent", [](auto& k, auto& v, CliConfig& c) { c.session.mu_coherent = to_double(k, v); }},
      {"session.mu_thermal", [](auto& k, auto& v, CliConfig& c) { c.session.mu_thermal = to_double(k, v); }},
      {"session.transmittance",
       [](auto& k, auto& v, CliConfig& c) { c.session.channel_transmittance_oneway = to_double(k, v); }},
      {"session.tap_reflectance",
       [](auto& k, auto& v, CliConfig& c) { c.session.bob_tap_reflectance = to_double(k, v); }},
      {"session.eta_alice", [](auto& k, auto& v, CliConfig& c) { c.session.detector_alice.eta = to_double(k, v); }},
      {"session.p_d_alice", [](auto& k, auto& v, CliConfig& c) { c.session.detector_alice.p_d = to_double(k, v); }},
      {"session.eta_bob", [](auto& k, auto& v, CliConfig& c) { c.session.detector_bob.eta = to_double(k, v); }},
      {"session.p_d_bob", [](auto& k, auto& v, CliConfig& c) { c.session.detector_bob.p_d = to_double(k, v); }},
      {"session.z_threshold", [](auto& k, auto& v, CliConfig& c) { c.session.z_threshold = to_double(k, v); }},
      {"session.qber_threshold",
       [](auto& k, auto& v, CliConfig& c) { c.session.qber_threshold = to_double(k, v); }},
      {"session.qber_sample_fraction",
       [](auto& k, auto& v, CliConfig& c) { c.session.qber_sample_fraction = to_double(k, v); }},
      {"session.seed", [](auto& k, auto& v, CliConfig& c) { c.session.seed = to_u64(k, v); }},
      {"attack.type", [](auto&, auto& v, CliConfig& c) { c.attack.type = v; }},
      {"attack.resend_mu", [](auto& k, auto& v, CliConfig& c) { c.attack.resend_mu = to_double(k, v); }},
      {"attack.tap_fraction", [](auto& k, auto& v, CliConfig& c) { c.attack.tap_fraction = to_double(k, v); }},
      {"attack.forced_click_prob",
       [](auto& k, auto& v, CliConfig& c) { c.attack.forced_click_prob = to_double(k, v); }},
      {"attack.probe", [](auto&, auto& v, CliConfig& c) { c.attack.probe = v; }},
      {"attack.probe_mu", [](auto& k, auto& v, CliConfig& c) { c.attack.probe_mu = to_double(k, v); }},
      {"attack.probe_n",
       [](auto& k, auto& v, CliConfig& c) { c.attack.probe_n = static_cast<int>(to_u64(k, v)); }},
      {"attack.eve_eta", [](auto& k, auto& v, CliConfig& c) { c.attack.eve_detector.eta = to_double(k, v); }},
      {"attack.eve_p_d", [](auto& k, auto& v, CliConfig& c) { c.attack.eve_detector.p_d = to_double(k, v); }},
      {"output.dir", [](auto&, auto& v, CliConfig& c) { c.out_dir = v; }},
      {"states.grid", [](auto& k, auto& v, CliConfig& c) {
         c.states_grid.clear();
         for (const auto& item : split_list(v)) c.states_grid.push_back(to_double(k, item));
       }},
      {"states.n_max",
       [](auto& k, auto& v, CliConfig& c) { c.states_n_max = static_cast<int>(to_u64(k, v)); }},
      {"sweep.parameter", [](auto&, auto& v, CliConfig& c) { c.sweep_parameter = v; }},
      {"sweep.values", [](auto& k, auto& v, CliConfig& c) {
         c.sweep_values.clear();
         for (const auto& item : split_list(v)) c.sweep_values.push_back(to_double(k, item));
       }},
      {"sweep.seeds", [](auto& k, auto& v, CliConfig& c) { c.sweep_seeds = to_u64(k, v); }},
      {"distinguish.mu_thermal", [](auto& k, auto& v, CliConfig& c) { c.dist_mu_thermal = to_double(k, v); }},
      {"distinguish.mu_coherent", [](auto& k, auto& v, CliConfig& c) { c.dist_mu_coherent = to_double(k, v); }},
      {"distinguish.eta", [](auto& k, auto& v, CliConfig& c) { c.dist_detector.eta = to_double(k, v); }},
      {"distinguish.p_d", [](auto& k, auto& v, CliConfig& c) { c.dist_detector.p_d = to_double(k, v); }},
      {"distinguish.z", [](auto& k, auto& v, CliConfig& c) { c.dist_z = to_double(k, v); }},
      {"distinguish.n_grid", [](auto& k, auto& v, CliConfig& c) {
         c.dist_n_grid.clear();
         for (const auto& item : split_list(v)) c.dist_n_grid.push_back(to_u64(k, item));
       }},
      {"distinguish.trials", [](auto& k, auto& v, CliConfig& c) { c.dist_trials = to_u64(k, v); }},
  };
  return table;
}

// Wraps library validation so every bad value reports as a configuration error.
template <class F>
void as_config_error(F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::filesystem::path emit(const CliConfig& cfg, const std::string& command, const std::string& ext,
                           const std::string& document) {
  if (!cfg.write_files) return {};
  std::filesystem::create_directories(cfg.out_dir);
  const auto path = cfg.out_dir / output_file_name(command, cfg.session.seed, ext);
  write_file_atomic(path, document);
  return path;
}

std::vector<std::uint64_t> default_distinguish_grid(std::optional<std::uint64_t> n_star) {
  std::vector<std::uint64_t> grid{1, 10, 100, 1000, 3000, 10000};
  if (n_star) {
    grid.push_back(*n_star);
    grid.push_back(2 * *n_star);
  } else {
    grid.push_back(100000);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw ConfigError(where + "bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (!section.empty()) key = section + "." + key;
    if (!kv.emplace(key, value).second) throw ConfigError(where + "duplicate key " + key);
  }
  return kv;
}

AttackConfig AttackParams::build() const {
  AttackConfig cfg;
  cfg.eve_detector = eve_detector;
  if (type == "none") {
    cfg.strategy = NoAttack{};
  } else if (type == "intercept-resend") {
    cfg.strategy = InterceptResend{resend_mu};
  } else if (type == "beam-split") {
    cfg.strategy = BeamSplit{tap_fraction};
  } else if (type == "mode-discrimination") {
    cfg.strategy = ModeDiscrimination{InterceptResend{resend_mu}};
  } else if (type == "trojan") {
    if (probe == "coherent") {
      if (!(probe_mu >= 0.0)) throw ConfigError("attack.probe_mu must be >= 0");
      cfg.strategy = TrojanHorse{Coherent{{std::sqrt(probe_mu), 0.0}}};
    } else if (probe == "fock") {
      cfg.strategy = TrojanHorse{FockN{probe_n}};
    } else {
      throw ConfigError("attack.probe must be coherent or fock, got '" + probe + "'");
    }
  } else if (type == "bright-light") {
    cfg.strategy = BrightLight{forced_click_prob};
  } else {
    throw ConfigError("unknown attack type '" + type +
                      "' (none, intercept-resend, beam-split, mode-discrimination, trojan, "
                      "bright-light)");
  }
  as_config_error([&] { cfg.validate(); });
  return cfg;
}

void CliConfig::validate() const {
  as_config_error([&] {
    session.validate();
    attack.build();
    dist_detector.validate();
  });
  if (states_grid.empty()) throw ConfigError("states.grid must be nonempty");
  for (const double v : states_grid) {
    if (!(v >= 0.0)) throw ConfigError("states.grid values must be >= 0");
  }
  if (states_n_max < 1) throw ConfigError("states.n_max must be >= 1");
  if (sweep_values.empty()) throw ConfigError("sweep.values must be nonempty");
  if (sweep_seeds < 1) throw ConfigError("sweep.seeds must be >= 1");
  if (!(dist_mu_thermal >= 0.0) || !(dist_mu_coherent >= 0.0)) {
    throw ConfigError("distinguish mean photon numbers must be >= 0");
  }
  if (!(dist_z > 0.0)) throw ConfigError("distinguish.z must be > 0");
  if (dist_trials < 1) throw ConfigError("distinguish.trials must be >= 1");
  for (const auto n : dist_n_grid) {
    if (n < 1) throw ConfigError("distinguish.n_grid values must be >= 1");
  }
}

void apply_config(const std::map<std::string, std::string>& kv, CliConfig& cfg) {
  for (const auto& [key, value] : kv) {
    const auto it = appliers().find(key);
    if (it == appliers().end()) throw ConfigError("unknown config key: " + key);
    it->second(key, value, cfg);
  }
}

CliConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  CliConfig cfg;
  apply_config(parse_config_text(buf.str()), cfg);
  return cfg;
}

CommandOutput cmd_states(const CliConfig& cfg) {
  cfg.validate();
  TruncationConfig trunc;
  trunc.n_max = cfg.states_n_max;
  std::string doc =
      "mu_1,mu_t,trace_distance,overlap_closed,overlap_numeric,thermal_min_eig,p0_coherent,"
      "p0_thermal\n";
  for (const double mu1 : cfg.states_grid) {
    const Complex alpha{std::sqrt(mu1), 0.0};
    DensityMatrix rho_c = vacuum_state(trunc);
    try {
      rho_c = coherent_state(alpha, trunc);
    } catch (const CutoffTooSmall& e) {
      throw ConfigError(std::string("states.grid: ") + e.what());
    }
    for (const double mut : cfg.states_grid) {
      DensityMatrix rho_t = vacuum_state(trunc);
      try {
        rho_t = thermal_state(mut, trunc);
      } catch (const CutoffTooSmall& e) {
        throw ConfigError(std::string("states.grid: ") + e.what());
      }
      doc += format_g6(mu1) + "," + format_g6(mut) + "," + format_g6(trace_distance(rho_c, rho_t)) +
             "," + format_g6(overlap_coherent_thermal(alpha, mut)) + "," +
             format_g6(expectation(rho_c, rho_t)) + "," + format_g6(min_eigenvalue(rho_t)) + "," +
             format_g6(vacuum_probability(rho_c)) + "," + format_g6(vacuum_probability(rho_t)) +
             "\n";
    }
  }
  CommandOutput out;
  out.document = doc;
  out.summary = doc;
  out.file = emit(cfg, "states", "csv", doc);
  return out;
}

CommandOutput cmd_session(const CliConfig& cfg) {
  cfg.validate();
  const AttackConfig attack = cfg.attack.build();
  SessionResult result;
  as_config_error([&] { result = run_session(cfg.session, attack); });
  CommandOutput out;
  out.document = session_json(result);
  out.summary = "qber=" + (result.qber ? format_g6(*result.qber) : std::string("null")) +
                " z_alice=" + format_g6(result.alice_monitor.z_score) + " z_bob=" +
                (result.bob_monitor ? format_g6(result.bob_monitor->z_score) : std::string("null")) +
                " alarm=" + to_string(result.alarm) + "\n";
  out.file = emit(cfg, "session", "json", out.document);
  out.exit_code = result.alarm == Alarm::None ? kExitOk : kExitAlarm;
  return out;
}

CommandOutput cmd_attack(const CliConfig& cfg) {
  cfg.validate();
  const AttackConfig attack = cfg.attack.build();
  SessionResult baseline;
  SessionResult attacked;
  as_config_error([&] {
    baseline = run_session(cfg.session, AttackConfig{});
    attacked = run_session(cfg.session, attack);
  });
  std::string doc = "run," + EveSummaryRow::csv_header() + ",alice_band_stat,bob_band_stat\n";
  const auto row = [](const std::string& run, const SessionResult& r) {
    return run + "," + eve_information_summary(r.eve, r).csv_row() + "," +
           format_g6(r.alice_monitor.observed_stat) + "," +
           (r.bob_monitor ? format_g6(r.bob_monitor->observed_stat) : std::string()) + "\n";
  };
  doc += row("baseline", baseline);
  doc += row("attacked", attacked);
  CommandOutput out;
  out.document = doc;
  out.summary = doc;
  out.file = emit(cfg, "attack", "csv", doc);
  out.exit_code = attacked.alarm == Alarm::None ? kExitOk : kExitAlarm;
  return out;
}

CommandOutput cmd_sweep(const CliConfig& cfg) {
  cfg.validate();
  SweepSpec spec;
  spec.parameter = cfg.sweep_parameter;
  spec.values = cfg.sweep_values;
  spec.base = cfg.session;
  spec.attack = cfg.attack.build();
  spec.seeds_per_point = cfg.sweep_seeds;
  std::vector<CurvePoint> points;
  as_config_error([&] {
    spec.validate();
    points = run_sweep(spec);
  });
  CommandOutput out;
  out.document = export_report(points, ReportFormat::Csv);
  out.summary = out.document;
  out.file = emit(cfg, "sweep", "csv", out.document);
  return out;
}

CommandOutput cmd_distinguish(const CliConfig& cfg) {
  cfg.validate();
  std::vector<std::uint64_t> grid = cfg.dist_n_grid;
  if (grid.empty()) {
    const double pt = click_prob_thermal(cfg.dist_detector, cfg.dist_mu_thermal);
    const double pc = click_prob_coherent(cfg.dist_detector, cfg.dist_mu_coherent);
    std::optional<std::uint64_t> n_star;
    if (pt > 0.0 && pt < 1.0 && pc > 0.0 && pc < 1.0) {
      as_config_error([&] { n_star = samples_needed(pt, pc, cfg.dist_z); });
    }
    grid = default_distinguish_grid(n_star);
  }
  DistinguishCurve curve;
  as_config_error([&] {
    curve = distinguishability_curve(cfg.dist_mu_thermal, cfg.dist_mu_coherent, cfg.dist_detector,
                                     cfg.dist_z, grid, cfg.dist_trials, cfg.session.seed);
  });
  CommandOutput out;
  out.document = distinguish_csv(curve);
  out.summary = "p_thermal=" + format_g6(curve.p_thermal) + " p_coherent=" +
                format_g6(curve.p_coherent) + " bayes_error=" +
                format_g6(curve.single_shot_bayes_error) + " n_star=" +
                (curve.n_star ? std::to_string(*curve.n_star) : std::string("none")) + "\n" +
                out.document;
  out.file = emit(cfg, "distinguish", "csv", out.document);
  return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-layer phase-shift QKD simulator"};
  app.name("ctqkd");
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string attack;
  std::uint64_t pulses = 0;
  double z_threshold = 0.0;
  auto* o_config = app.add_option("--config", config_path, "key/value config file");
  auto* o_seed = app.add_option("--seed", seed, "master seed");
  auto* o_out = app.add_option("--out-dir", out_dir, "directory for output files");
  auto* o_attack = app.add_option("--attack", attack,
                                  "none|intercept-resend|beam-split|mode-discrimination|trojan|"
                                  "bright-light");
  auto* o_pulses = app.add_option("--pulses", pulses, "pulses per session");
  auto* o_z = app.add_option("--z-threshold", z_threshold, "monitor z threshold");

  using Command = std::function<CommandOutput(const CliConfig&)>;
  const std::vector<std::pair<std::string, Command>> commands = {
      {"states", cmd_states},   {"session", cmd_session},         {"attack", cmd_attack},
      {"sweep", cmd_sweep},     {"distinguish", cmd_distinguish},
  };
  const std::map<std::string, std::string> help = {
      {"states", "state-level checks over a mean photon number grid"},
      {"session", "one session; writes JSON; exit 3 on alarm"},
      {"attack", "baseline and attacked sessions on the same seed"},
      {"sweep", "parameter sweep; writes CSV"},
      {"distinguish", "thermal/coherent discrimination error vs samples"},
  };
  for (const auto& [name, fn] : commands) app.add_subcommand(name, help.at(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    CliConfig cfg;
    if (o_config->count()) cfg = load_config_file(config_path);
    if (o_seed->count()) cfg.session.seed = seed;
    if (o_out->count()) cfg.out_dir = out_dir;
    if (o_attack->count()) cfg.attack.type = attack;
    if (o_pulses->count()) cfg.session.n_pulses = pulses;
    if (o_z->count()) cfg.session.z_threshold = z_threshold;

    for (const auto& [name, fn] : commands) {
      if (!app.got_subcommand(name)) continue;
      const CommandOutput result = fn(cfg);
      out << result.summary;
      if (!result.file.empty()) out << "wrote " << result.file.string() << "\n";
      return result.exit_code;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfigError;
}

}  // namespace ctqkd

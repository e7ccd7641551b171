#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctqkd/attacks.hpp"
#include "ctqkd/fock.hpp"
#include "ctqkd/protocol.hpp"

namespace ctqkd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitAlarm = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key/value file. `[section]` prefixes the following keys with
/// "section."; `#` starts a comment; blank lines are ignored.
///
///   [session]
///   n_pulses = 100000
///   mu_coherent = 0.2
///
/// Throws ConfigError on malformed lines or duplicate keys.
std::map<std::string, std::string> parse_config_text(const std::string& text);

struct AttackParams {
  std::string type = "none";
  double resend_mu = 0.2;
  double tap_fraction = 0.5;
  double forced_click_prob = 1.0;
  std::string probe = "coherent";  // coherent | fock
  double probe_mu = 10.0;
  int probe_n = 2;
  DetectorModel eve_detector{1.0, 0.0};

  AttackConfig build() const;
};

struct CliConfig {
  SessionConfig session;
  AttackParams attack;
  std::filesystem::path out_dir = ".";
  bool write_files = true;

  std::vector<double> states_grid{0.0, 0.1, 0.2, 0.5, 1.0};
  int states_n_max = 40;

  std::string sweep_parameter = "n_pulses";
  std::vector<double> sweep_values{10000, 30000, 100000};
  std::uint64_t sweep_seeds = 5;

  double dist_mu_thermal = 0.2;
  double dist_mu_coherent = 0.2;
  DetectorModel dist_detector{1.0, 0.0};
  double dist_z = 3.0;
  std::vector<std::uint64_t> dist_n_grid;  // empty: default grid around n*
  std::uint64_t dist_trials = 20000;

  /// Throws ConfigError.
  void validate() const;
};

/// Applies keys on top of `cfg`. Unknown keys and unparsable values raise
/// ConfigError. Recognized keys:
///   session.{n_pulses, mu_coherent, mu_thermal, transmittance, tap_reflectance,
///            eta_alice, p_d_alice, eta_bob, p_d_bob, z_threshold,
///            qber_threshold, qber_sample_fraction, seed}
///   attack.{type, resend_mu, tap_fraction, forced_click_prob, probe,
///           probe_mu, probe_n, eve_eta, eve_p_d}
///   output.dir
///   states.{grid, n_max}
///   sweep.{parameter, values, seeds}
///   distinguish.{mu_thermal, mu_coherent, eta, p_d, z, n_grid, trials}
/// List values are comma separated.
void apply_config(const std::map<std::string, std::string>& kv, CliConfig& cfg);

CliConfig load_config_file(const std::filesystem::path& path);

struct CommandOutput {
  int exit_code = kExitOk;
  std::string document;  // file content (CSV or JSON)
  std::string summary;   // printed to stdout
  std::filesystem::path file;
};

CommandOutput cmd_states(const CliConfig& cfg);
CommandOutput cmd_session(const CliConfig& cfg);
CommandOutput cmd_attack(const CliConfig& cfg);
CommandOutput cmd_sweep(const CliConfig& cfg);
CommandOutput cmd_distinguish(const CliConfig& cfg);

/// Entry point for the `ctqkd` binary.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ctqkd

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ctqkd/cli.hpp"
#include "ctqkd/format.hpp"

using namespace ctqkd;

namespace {

CliConfig quiet() {
  CliConfig c;
  c.write_files = false;
  return c;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

std::vector<std::string> cells(const std::string& row) {
  std::vector<std::string> out;
  std::stringstream ss(row);
  std::string c;
  while (std::getline(ss, c, ',')) out.push_back(c);
  return out;
}

int run(std::vector<const char*> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "ctqkd");
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(args.size()), args.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

}  // namespace

TEST(Config, ParsesSectionsAndComments) {
  const auto kv = parse_config_text(
      "# top comment\n"
      "[session]\n"
      "n_pulses = 2000   # inline\n"
      "mu_thermal=0.3\n"
      "\n"
      "[attack]\n"
      "type = beam-split\n");
  EXPECT_EQ(kv.at("session.n_pulses"), "2000");
  EXPECT_EQ(kv.at("session.mu_thermal"), "0.3");
  EXPECT_EQ(kv.at("attack.type"), "beam-split");
  CliConfig cfg;
  apply_config(kv, cfg);
  EXPECT_EQ(cfg.session.n_pulses, 2000u);
  EXPECT_DOUBLE_EQ(cfg.session.mu_thermal, 0.3);
  EXPECT_EQ(cfg.attack.build().tag(), "beam-split");
}

TEST(Config, RejectsMalformedAndUnknown) {
  EXPECT_THROW(parse_config_text("[session\n"), ConfigError);
  EXPECT_THROW(parse_config_text("novalue\n"), ConfigError);
  EXPECT_THROW(parse_config_text("a = 1\na = 2\n"), ConfigError);
  CliConfig cfg;
  EXPECT_THROW(apply_config({{"session.bogus", "1"}}, cfg), ConfigError);
  EXPECT_THROW(apply_config({{"session.mu_thermal", "abc"}}, cfg), ConfigError);
  EXPECT_THROW(apply_config({{"session.n_pulses", "-5"}}, cfg), ConfigError);
  cfg.attack.type = "laser";
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = CliConfig{};
  cfg.session.channel_transmittance_oneway = 2.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Config, ListsAndProbes) {
  CliConfig cfg;
  apply_config({{"states.grid", "0, 0.5,1"}, {"attack.type", "trojan"}, {"attack.probe", "fock"},
                {"attack.probe_n", "1"}, {"distinguish.n_grid", "1,10"}},
               cfg);
  EXPECT_EQ(cfg.states_grid, (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(cfg.dist_n_grid, (std::vector<std::uint64_t>{1, 10}));
  const auto atk = cfg.attack.build();
  EXPECT_EQ(std::get<TrojanHorse>(atk.strategy).probe, LightField{FockN{1}});
}

TEST(Cli, StatesTable) {
  const auto out = cmd_states(quiet());
  EXPECT_EQ(out.exit_code, 0);
  const auto rows = lines(out.document);
  ASSERT_EQ(rows.size(), 26u);
  bool saw_golden = false;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto c = cells(rows[i]);
    const double mu1 = std::stod(c[0]);
    const double mut = std::stod(c[1]);
    if (mu1 == 0.0) EXPECT_EQ(c[3], format_g6(1 / (1 + mut)));
    if (mu1 == 0.0 && mut == 0.0) EXPECT_EQ(c[2], "0");
    if (mu1 == 0.2 && mut == 0.2) {
      EXPECT_EQ(c[2], "0.407779");
      saw_golden = true;
    }
    EXPECT_EQ(c[3], c[4]);
  }
  EXPECT_TRUE(saw_golden);
}

TEST(Cli, StatesRejectsBadGrid) {
  auto cfg = quiet();
  cfg.states_grid = {0.2, -1.0};
  EXPECT_THROW(cmd_states(cfg), ConfigError);
  cfg.states_grid = {30.0};
  EXPECT_THROW(cmd_states(cfg), ConfigError);
}

TEST(Cli, SessionExitCodes) {
  auto cfg = quiet();
  const auto honest = cmd_session(cfg);
  EXPECT_EQ(honest.exit_code, kExitOk);
  EXPECT_NE(honest.summary.find("alarm=none"), std::string::npos);
  EXPECT_EQ(cmd_session(cfg).document, honest.document);
  cfg.attack.type = "intercept-resend";
  EXPECT_EQ(cmd_session(cfg).exit_code, kExitAlarm);
}

TEST(Cli, AttackComparison) {
  auto cfg = quiet();
  cfg.session.n_pulses = 10000;
  cfg.attack.type = "trojan";
  auto rows = lines(cmd_attack(cfg).document);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "run,attack,qber,z_alice,z_bob,eve_correct_fraction,alarm,alice_band_stat,bob_band_stat");
  EXPECT_EQ(cells(rows[1])[6], "none");
  EXPECT_EQ(cells(rows[2])[6], "bob_power");

  cfg.attack.type = "bright-light";
  rows = lines(cmd_attack(cfg).document);
  EXPECT_EQ(cells(rows[2])[7], "0");

  cfg.attack.type = "none";
  const auto none = cmd_attack(cfg);
  EXPECT_EQ(none.exit_code, kExitOk);
  rows = lines(none.document);
  EXPECT_EQ(cells(rows[2])[6], "none");
  EXPECT_EQ(rows[1].substr(rows[1].find(',')), rows[2].substr(rows[2].find(',')));
}

TEST(Cli, SinglePointSweepMatchesSession) {
  auto cfg = quiet();
  cfg.sweep_parameter = "n_pulses";
  cfg.sweep_values = {100000};
  cfg.sweep_seeds = 1;
  const auto rows = lines(cmd_sweep(cfg).document);
  ASSERT_EQ(rows.size(), 2u);
  const auto c = cells(rows[1]);
  const auto s = cmd_session(cfg).summary;
  EXPECT_NE(s.find("qber=" + c[2] + " "), std::string::npos) << s << rows[1];
  EXPECT_NE(s.find("z_alice=" + c[3] + " "), std::string::npos) << s << rows[1];
  EXPECT_NE(s.find("z_bob=" + c[4] + " "), std::string::npos) << s << rows[1];
}

TEST(Cli, DistinguishCurves) {
  auto cfg = quiet();
  const auto def = cmd_distinguish(cfg);
  const auto rows = lines(def.document);
  const auto pos = def.summary.find("n_star=");
  const std::string n_star = def.summary.substr(pos + 7, def.summary.find('\n') - pos - 7);
  bool found = false;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto c = cells(rows[i]);
    if (c[0] == n_star) {
      found = true;
      EXPECT_LT(std::stod(c[1]), 0.003);
    }
  }
  EXPECT_TRUE(found);

  cfg.dist_mu_thermal = std::expm1(cfg.dist_mu_coherent);
  const auto flat = lines(cmd_distinguish(cfg).document);
  for (std::size_t i = 1; i < flat.size(); ++i) EXPECT_NEAR(std::stod(cells(flat[i])[1]), 0.5, 0.015);
}

TEST(Cli, EntryPointExitCodes) {
  std::string text;
  EXPECT_EQ(run({"--help"}, &text), 0);
  EXPECT_NE(text.find("distinguish"), std::string::npos);
  EXPECT_EQ(run({"session", "--bogus"}), kExitConfigError);
  EXPECT_EQ(run({}), kExitConfigError);
  EXPECT_EQ(run({"session", "--attack", "laser"}, &text), kExitConfigError);
  EXPECT_NE(text.find("unknown attack type"), std::string::npos);
  EXPECT_EQ(run({"session", "--config", "/nonexistent/ctqkd.cfg"}), kExitConfigError);
  EXPECT_EQ(run({"session", "--pulses", "10"}), kExitConfigError);
}

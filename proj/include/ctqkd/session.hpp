#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctqkd/attacks.hpp"
#include "ctqkd/protocol.hpp"

namespace ctqkd {

enum class Alarm { None, Qber, AlicePower, BobPower, Multiple };
std::string to_string(Alarm a);

struct SessionCounts {
  std::uint64_t sent = 0;
  std::uint64_t clicked = 0;  // events with at least one click
  std::uint64_t sifted = 0;   // before the disclosed sample is removed
  std::uint64_t disclosed = 0;
  std::uint64_t double_clicks = 0;
};

struct SessionResult {
  SessionConfig config;
  std::string attack_tag = "none";
  std::vector<std::uint8_t> sifted_key_alice;
  std::vector<std::uint8_t> sifted_key_bob;
  std::optional<double> qber;          // disclosed-sample estimate
  double full_key_error_rate = 0.0;    // all sifted bits; simulator ground truth
  std::string key_error;               // non-empty when no QBER could be estimated
  PowerTestOutcome alice_monitor;
  std::optional<PowerTestOutcome> bob_monitor;  // nullopt: tap disabled (r = 0)
  Alarm alarm = Alarm::None;
  SessionCounts counts;
  EveReport eve;

  bool key_accepted() const { return alarm == Alarm::None; }
};

/// Full two-layer session: prepare, forward channel, (type III), Bob modulate
/// and monitor, return channel, (types I/II/IV), Alice separation, thermal
/// monitor, interferometers, sifting and verdict. Deterministic in cfg.seed.
/// Throws std::invalid_argument on an inconsistent configuration before any
/// simulation work.
SessionResult run_session(const SessionConfig& cfg, const AttackConfig& attack = {});

Alarm session_verdict(const SessionResult& result, const SessionConfig& cfg);

/// Applies the type I/II/IV interposition for `attack` to the pulses arriving
/// at Alice. NoAttack returns the input unchanged.
InterposeResult interpose_return_leg(std::span<const PulseRecord> returning,
                                     const AttackConfig& attack, Rng& rng,
                                     const std::vector<int>* mode_guesses = nullptr);

struct EveSummaryRow {
  std::string attack;
  std::optional<double> qber;
  double z_alice = 0.0;
  std::optional<double> z_bob;
  double eve_correct_fraction = 0.0;
  Alarm alarm = Alarm::None;

  static std::string csv_header();
  std::string csv_row() const;
};

EveSummaryRow eve_information_summary(const EveReport& report, const SessionResult& result);

}  // namespace ctqkd

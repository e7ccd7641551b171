#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ctqkd/detector.hpp"
#include "ctqkd/light_field.hpp"
#include "ctqkd/protocol.hpp"
#include "ctqkd/rng.hpp"

namespace ctqkd {

// Eve's strategies. Types I (InterceptResend, BeamSplit), II
// (ModeDiscrimination), III (TrojanHorse) and IV (BrightLight).

struct NoAttack {};

/// Measures each returning pulse pair in a random basis and resends coherent
/// pulses carrying her inferred phase differences in both polarization modes.
struct InterceptResend {
  double resend_mu = 0.2;
};

struct BeamSplit {
  double tap_fraction = 0.5;
};

/// Single-pulse Bayes guess of the mode secret on Alice's output, then an
/// intercept-resend restricted to the guessed coherent mode.
struct ModeDiscrimination {
  InterceptResend then;
};

struct TrojanHorse {
  LightField probe = Coherent{{std::sqrt(10.0), 0.0}};
};

struct BrightLight {
  double forced_click_prob = 1.0;
};

using AttackStrategy =
    std::variant<NoAttack, InterceptResend, BeamSplit, ModeDiscrimination, TrojanHorse, BrightLight>;

struct AttackConfig {
  AttackStrategy strategy = NoAttack{};
  /// Eve's own detectors; ideal by default.
  DetectorModel eve_detector{1.0, 0.0};

  bool is_none() const { return std::holds_alternative<NoAttack>(strategy); }
  /// Stable tag: none, intercept-resend, beam-split, mode-discrimination,
  /// trojan, bright-light.
  std::string tag() const;
  void validate() const;
};

struct EveReport {
  std::string strategy = "none";
  std::uint64_t learned_phase_count = 0;
  double guessed_bits_correct_fraction = 0.0;  // over Alice/Bob's sifted bits
  std::uint64_t pairs_measured = 0;
  std::uint64_t basis_matches = 0;
  double tapped_mean_photons = 0.0;
  std::string notes;
};

/// What Eve believes about each pair's phase difference, indexed by the
/// later pulse of the pair. Used to score her guesses on the sifted key.
using EveInferences = std::vector<std::optional<QuarterPhase>>;

struct InterposeResult {
  std::vector<PulseRecord> pulses;
  EveReport report;
  EveInferences inferences;
};

struct ModeGuess {
  int guess = 0;  // guessed mode_assignment
  double error_prob = 0.5;
};

/// ½[min(P_c,P_t) + min(1-P_c,1-P_t)]
double bayes_error(double p_c, double p_t);

/// Type II, single pulse. Eve clicks (or not) on field_H and picks the
/// likelier hypothesis; ties are broken with a fair coin.
ModeGuess attack_mode_discrimination(const PulseRecord& pulse, const DetectorModel& eve_det,
                                     Rng& rng);

/// Type I on the Bob→Alice leg. `mode_guesses`, when given, restricts the
/// measurement and the resend to the guessed coherent mode of each pulse.
InterposeResult attack_intercept_resend(std::span<const PulseRecord> returning,
                                        const InterceptResend& attack, Rng& rng,
                                        const std::vector<int>* mode_guesses = nullptr);

InterposeResult attack_beamsplit(std::span<const PulseRecord> returning, const BeamSplit& attack,
                                 Rng& rng);

/// Type III, forward leg: Eve keeps Alice's pulses and sends her probe
/// (field_H = probe, field_V = vacuum) to Bob.
std::vector<PulseRecord> attack_trojan_substitute(std::span<const PulseRecord> at_bob,
                                                  const TrojanHorse& attack);

/// Type III, return leg: Eve reads Bob's phase from every probe that shows
/// at least two photons on her analyzer, then forwards her stored copies of
/// Alice's pulses (loss (1-r) applied) with the learned phase, or a random
/// quarter phase when she learned nothing.
InterposeResult attack_trojan_recover(std::span<const PulseRecord> probes_after_bob,
                                      std::span<const PulseRecord> stored_alice,
                                      const SessionConfig& cfg, const DetectorModel& eve_det,
                                      Rng& rng);

/// Number of photons Eve's analyzer registers from one field.
std::uint64_t analyzer_photon_count(const LightField& field, double eta, Rng& rng);

/// Type IV: both modes replaced by blinding light.
std::vector<PulseRecord> attack_bright_light(std::span<const PulseRecord> returning,
                                             const BrightLight& attack);

}  // namespace ctqkd

#include "ctqkd/session.hpp"

#include <stdexcept>

#include "ctqkd/format.hpp"

namespace ctqkd {

namespace {

// Independent generator streams; one per role keeps baseline and attacked
// runs on the same seed aligned on Alice's and Bob's choices.
enum Stream : std::uint32_t {
  kAlice = 1,
  kForwardChannel,
  kBob,
  kBobMonitor,
  kEve,
  kReturnChannel,
  kAliceMonitor,
  kAliceDetectors,
  kSifting,
  kEveScoring,
  kBobLoss,
};

double eve_score(const SiftOutcome& sift, const EveInferences& inferences, Rng& rng) {
  if (sift.sifted_pairs.empty()) return 0.0;
  std::uint64_t correct = 0;
  for (std::size_t i = 0; i < sift.sifted_pairs.size(); ++i) {
    const auto k = sift.sifted_pairs[i];
    std::optional<std::uint8_t> guess;
    if (k < inferences.size() && inferences[k]) guess = bob_bit(*inferences[k], sift.sifted_bases[i]);
    const std::uint8_t bit = guess ? *guess : (bernoulli(rng, 0.5) ? 1 : 0);
    correct += bit == sift.sifted_bob_bits[i] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(sift.sifted_pairs.size());
}

}  // namespace

std::string to_string(Alarm a) {
  switch (a) {
    case Alarm::None: return "none";
    case Alarm::Qber: return "qber";
    case Alarm::AlicePower: return "alice_power";
    case Alarm::BobPower: return "bob_power";
    case Alarm::Multiple: return "multiple";
  }
  return "?";
}

InterposeResult interpose_return_leg(std::span<const PulseRecord> returning,
                                     const AttackConfig& attack, Rng& rng,
                                     const std::vector<int>* mode_guesses) {
  if (const auto* ir = std::get_if<InterceptResend>(&attack.strategy)) {
    return attack_intercept_resend(returning, *ir, rng);
  }
  if (const auto* md = std::get_if<ModeDiscrimination>(&attack.strategy)) {
    if (mode_guesses == nullptr) throw std::invalid_argument("mode discrimination needs guesses");
    return attack_intercept_resend(returning, md->then, rng, mode_guesses);
  }
  if (const auto* bs = std::get_if<BeamSplit>(&attack.strategy)) {
    return attack_beamsplit(returning, *bs, rng);
  }
  InterposeResult res;
  res.inferences.assign(returning.size(), std::nullopt);
  if (const auto* bl = std::get_if<BrightLight>(&attack.strategy)) {
    res.pulses = attack_bright_light(returning, *bl);
    res.report.strategy = "bright-light";
    res.report.notes = "forced_click_prob=" + format_g6(bl->forced_click_prob);
  } else {
    res.pulses.assign(returning.begin(), returning.end());
    res.report.strategy = attack.tag();
  }
  return res;
}

SessionResult run_session(const SessionConfig& cfg, const AttackConfig& attack) {
  cfg.validate();
  attack.validate();
  if (cfg.n_pulses < 100) {
    throw std::invalid_argument("n_pulses must be >= 100 for the power monitors");
  }

  Rng alice_rng = derive_rng(cfg.seed, kAlice);
  Rng fwd_rng = derive_rng(cfg.seed, kForwardChannel);
  Rng bob_rng = derive_rng(cfg.seed, kBob);
  Rng bob_mon_rng = derive_rng(cfg.seed, kBobMonitor);
  Rng eve_rng = derive_rng(cfg.seed, kEve);
  Rng ret_rng = derive_rng(cfg.seed, kReturnChannel);
  Rng alice_mon_rng = derive_rng(cfg.seed, kAliceMonitor);
  Rng alice_det_rng = derive_rng(cfg.seed, kAliceDetectors);
  Rng sift_rng = derive_rng(cfg.seed, kSifting);
  Rng score_rng = derive_rng(cfg.seed, kEveScoring);
  Rng bob_loss_rng = derive_rng(cfg.seed, kBobLoss);

  const double t = cfg.channel_transmittance_oneway;
  const double r = cfg.bob_tap_reflectance;
  const std::size_t n = cfg.n_pulses;

  std::vector<PulseRecord> pulses = alice_prepare(cfg, alice_rng);

  std::vector<int> mode_guesses;
  if (std::holds_alternative<ModeDiscrimination>(attack.strategy)) {
    mode_guesses.reserve(n);
    for (const auto& p : pulses) {
      mode_guesses.push_back(attack_mode_discrimination(p, attack.eve_detector, eve_rng).guess);
    }
  }

  for (auto& p : pulses) p = propagate(p, t, fwd_rng);

  const auto* trojan = std::get_if<TrojanHorse>(&attack.strategy);
  std::vector<PulseRecord> stored;
  if (trojan != nullptr) {
    stored = pulses;
    pulses = attack_trojan_substitute(stored, *trojan);
  }

  auto bob_reading = bob_monitor_tap(pulses, cfg, bob_mon_rng);
  for (auto& p : pulses) {
    p = bob_modulate(propagate(p, 1.0 - r, bob_loss_rng), draw_bob_phase(bob_rng).radians());
  }

  EveReport report;
  EveInferences inferences(n);
  if (trojan != nullptr) {
    auto recovered = attack_trojan_recover(pulses, stored, cfg, attack.eve_detector, eve_rng);
    pulses = std::move(recovered.pulses);
    report = std::move(recovered.report);
    inferences = std::move(recovered.inferences);
  }

  for (auto& p : pulses) p = propagate(p, t, ret_rng);

  if (trojan == nullptr) {
    auto interposed = interpose_return_leg(pulses, attack, eve_rng,
                                           mode_guesses.empty() ? nullptr : &mode_guesses);
    pulses = std::move(interposed.pulses);
    report = std::move(interposed.report);
    inferences = std::move(interposed.inferences);
  }

  std::vector<LightField> output2;
  output2.reserve(n);
  for (const auto& p : pulses) output2.push_back(alice_separate_modes(p).second);
  const auto alice_reading = alice_thermal_monitor(output2, cfg, alice_mon_rng);

  std::vector<InterferometerEvent> events;
  events.reserve(n - 1);
  SessionCounts counts;
  counts.sent = n;
  for (std::size_t k = 1; k < n; ++k) {
    events.push_back(interferometer_measure(pulses[k - 1], pulses[k], cfg, alice_det_rng));
    const Port port = events.back().port;
    if (port != Port::None) ++counts.clicked;
    if (port == Port::Double) ++counts.double_clicks;
  }

  SiftOutcome sift = sift_and_qber(events, cfg, sift_rng);
  counts.sifted = sift.sifted_pairs.size();
  counts.disclosed = sift.disclosed;

  SessionResult result;
  result.config = cfg;
  result.attack_tag = attack.tag();
  result.qber = sift.qber;
  result.key_error = sift.error;
  if (counts.sifted > 0) {
    result.full_key_error_rate =
        static_cast<double>(sift.full_key_errors) / static_cast<double>(counts.sifted);
  }
  if (!attack.is_none()) report.guessed_bits_correct_fraction = eve_score(sift, inferences, score_rng);
  result.sifted_key_alice = std::move(sift.alice_key);
  result.sifted_key_bob = std::move(sift.bob_key);
  result.alice_monitor = alice_reading.outcome;
  if (bob_reading) result.bob_monitor = bob_reading->outcome;
  result.counts = counts;
  result.eve = std::move(report);
  result.alarm = session_verdict(result, cfg);
  return result;
}

Alarm session_verdict(const SessionResult& result, const SessionConfig& cfg) {
  const bool qber_alarm = !result.qber.has_value() || *result.qber > cfg.qber_threshold;
  const bool alice_alarm = !result.alice_monitor.pass;
  const bool bob_alarm = result.bob_monitor.has_value() && !result.bob_monitor->pass;
  const int raised = int{qber_alarm} + int{alice_alarm} + int{bob_alarm};
  if (raised == 0) return Alarm::None;
  if (raised > 1) return Alarm::Multiple;
  if (qber_alarm) return Alarm::Qber;
  return alice_alarm ? Alarm::AlicePower : Alarm::BobPower;
}

std::string EveSummaryRow::csv_header() {
  return "attack,qber,z_alice,z_bob,eve_correct_fraction,alarm";
}

std::string EveSummaryRow::csv_row() const {
  return attack + "," + (qber ? format_g6(*qber) : std::string()) + "," + format_g6(z_alice) +
         "," + (z_bob ? format_g6(*z_bob) : std::string()) + "," +
         format_g6(eve_correct_fraction) + "," + to_string(alarm);
}

EveSummaryRow eve_information_summary(const EveReport& report, const SessionResult& result) {
  EveSummaryRow row;
  row.attack = result.attack_tag;
  row.qber = result.qber;
  row.z_alice = result.alice_monitor.z_score;
  if (result.bob_monitor) row.z_bob = result.bob_monitor->z_score;
  row.eve_correct_fraction = report.guessed_bits_correct_fraction;
  row.alarm = result.alarm;
  return row;
}

}  // namespace ctqkd

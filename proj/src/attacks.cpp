#include "ctqkd/attacks.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace ctqkd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::complex<double> amplitude_of(const LightField& f) {
  if (const auto* c = std::get_if<Coherent>(&f)) return c->amplitude;
  return {0.0, 0.0};
}

// The coherent content Eve is credited with on a pulse (see attack_intercept_resend).
std::complex<double> eve_coherent_view(const PulseRecord& p, const std::vector<int>* guesses) {
  if (guesses != nullptr) {
    return amplitude_of((*guesses)[p.index] == 0 ? p.field_H : p.field_V);
  }
  if (is_coherent(p.field_H)) return amplitude_of(p.field_H);
  return amplitude_of(p.field_V);
}

}  // namespace

std::string AttackConfig::tag() const {
  return std::visit(overloaded{
                        [](const NoAttack&) { return std::string("none"); },
                        [](const InterceptResend&) { return std::string("intercept-resend"); },
                        [](const BeamSplit&) { return std::string("beam-split"); },
                        [](const ModeDiscrimination&) { return std::string("mode-discrimination"); },
                        [](const TrojanHorse&) { return std::string("trojan"); },
                        [](const BrightLight&) { return std::string("bright-light"); },
                    },
                    strategy);
}

void AttackConfig::validate() const {
  eve_detector.validate();
  const auto check_resend = [](const InterceptResend& ir) {
    if (!(ir.resend_mu >= 0.0) || !std::isfinite(ir.resend_mu)) {
      throw std::invalid_argument("resend_mu must be >= 0");
    }
  };
  std::visit(overloaded{
                 [](const NoAttack&) {},
                 check_resend,
                 [](const BeamSplit& b) {
                   if (!(b.tap_fraction > 0.0 && b.tap_fraction < 1.0)) {
                     throw std::invalid_argument("tap_fraction must lie in (0,1)");
                   }
                 },
                 [&](const ModeDiscrimination& m) { check_resend(m.then); },
                 [](const TrojanHorse& t) { ctqkd::validate(t.probe); },
                 [](const BrightLight& b) {
                   if (!(b.forced_click_prob > 0.0 && b.forced_click_prob <= 1.0)) {
                     throw std::invalid_argument("forced_click_prob must lie in (0,1]");
                   }
                 },
             },
             strategy);
}

double bayes_error(double p_c, double p_t) {
  return 0.5 * (std::min(p_c, p_t) + std::min(1.0 - p_c, 1.0 - p_t));
}

ModeGuess attack_mode_discrimination(const PulseRecord& pulse, const DetectorModel& eve_det,
                                     Rng& rng) {
  const LightField* coherent = nullptr;
  const LightField* other = nullptr;
  if (is_coherent(pulse.field_H)) {
    coherent = &pulse.field_H;
    other = &pulse.field_V;
  } else if (is_coherent(pulse.field_V)) {
    coherent = &pulse.field_V;
    other = &pulse.field_H;
  } else {
    throw std::invalid_argument("mode discrimination needs a pulse carrying a coherent field");
  }
  const double p_c = click_probability(*coherent, eve_det);
  const double p_t = click_probability(*other, eve_det);

  const bool click = bernoulli(rng, click_probability(pulse.field_H, eve_det));
  // Likelihood of the observation under "coherent in H" (guess 0) and "coherent in V" (guess 1).
  const double like_h = click ? p_c : 1.0 - p_c;
  const double like_v = click ? p_t : 1.0 - p_t;
  ModeGuess out;
  if (like_h > like_v) {
    out.guess = 0;
  } else if (like_h < like_v) {
    out.guess = 1;
  } else {
    out.guess = bernoulli(rng, 0.5) ? 1 : 0;
  }
  out.error_prob = bayes_error(p_c, p_t);
  return out;
}

InterposeResult attack_intercept_resend(std::span<const PulseRecord> returning,
                                        const InterceptResend& attack, Rng& rng,
                                        const std::vector<int>* mode_guesses) {
  InterposeResult res;
  res.pulses.assign(returning.begin(), returning.end());
  res.inferences.assign(returning.size(), std::nullopt);
  res.report.strategy = mode_guesses ? "mode-discrimination" : "intercept-resend";
  if (mode_guesses != nullptr && mode_guesses->size() < returning.size()) {
    throw std::invalid_argument("one mode guess per pulse is required");
  }

  const double resend_amp = std::sqrt(attack.resend_mu);
  QuarterPhase theta;
  for (std::size_t k = 0; k < returning.size(); ++k) {
    if (k > 0) {
      // Idealized conclusive measurement on the coherent content of the pair:
      // the port follows the interference pattern with unit visibility.
      const Basis basis = bernoulli(rng, 0.5) ? Basis::B : Basis::A;
      const auto means = interferometer_means(eve_coherent_view(returning[k - 1], mode_guesses),
                                              eve_coherent_view(returning[k], mode_guesses));
      const int x = basis == Basis::A ? 0 : 2;
      const double total = means[x] + means[x + 1];
      const bool port0 = total > 0.0 ? bernoulli(rng, means[x] / total) : bernoulli(rng, 0.5);
      const QuarterPhase inferred((basis == Basis::A ? 0 : 1) + (port0 ? 0 : 2));
      theta = theta + inferred;
      res.inferences[k] = inferred;
      ++res.report.pairs_measured;

      const auto& prev = returning[k - 1];
      const auto& cur = returning[k];
      if (prev.bob_phase && cur.bob_phase) {
        const QuarterPhase truth = *cur.bob_phase - *prev.bob_phase;
        if (bob_bit(truth, basis)) ++res.report.basis_matches;
        if (truth == inferred) ++res.report.learned_phase_count;
      }
    }
    const LightField resent = Coherent{std::polar(resend_amp, theta.radians())};
    PulseRecord& out = res.pulses[k];
    if (mode_guesses == nullptr) {
      out.field_H = resent;
      out.field_V = resent;
    } else if ((*mode_guesses)[out.index] == 0) {
      out.field_H = resent;
    } else {
      out.field_V = resent;
    }
  }
  res.report.notes = "resend_mu=" + std::to_string(attack.resend_mu);
  return res;
}

InterposeResult attack_beamsplit(std::span<const PulseRecord> returning, const BeamSplit& attack,
                                 Rng& rng) {
  InterposeResult res;
  res.report.strategy = "beam-split";
  res.inferences.assign(returning.size(), std::nullopt);
  res.pulses.reserve(returning.size());
  double tapped = 0.0;
  for (const auto& p : returning) {
    for (const LightField* f : {&p.field_H, &p.field_V}) {
      const double mean = mean_photons(*f);
      if (std::isfinite(mean)) tapped += attack.tap_fraction * mean;
    }
    res.pulses.push_back(propagate(p, 1.0 - attack.tap_fraction, rng));
  }
  res.report.tapped_mean_photons = tapped;
  res.report.notes = "tapped energy reported only; not decoded";
  return res;
}

std::vector<PulseRecord> attack_trojan_substitute(std::span<const PulseRecord> at_bob,
                                                  const TrojanHorse& attack) {
  std::vector<PulseRecord> probes(at_bob.begin(), at_bob.end());
  for (auto& p : probes) {
    p.field_H = attack.probe;
    p.field_V = Vacuum{};
  }
  return probes;
}

std::uint64_t analyzer_photon_count(const LightField& field, double eta, Rng& rng) {
  return std::visit(
      overloaded{
          [](const Vacuum&) -> std::uint64_t { return 0; },
          [&](const Coherent& c) -> std::uint64_t {
            const double mean = eta * std::norm(c.amplitude);
            if (mean <= 0.0) return 0;
            std::poisson_distribution<std::uint64_t> dist(mean);
            return dist(rng);
          },
          [&](const Thermal& t) -> std::uint64_t {
            const double mean = eta * t.mean_photons;
            if (mean <= 0.0) return 0;
            std::geometric_distribution<std::uint64_t> dist(1.0 / (1.0 + mean));
            return dist(rng);
          },
          [&](const FockN& f) -> std::uint64_t {
            std::uint64_t seen = 0;
            for (int i = 0; i < f.n; ++i) seen += bernoulli(rng, eta) ? 1 : 0;
            return seen;
          },
          [](const Blinding&) -> std::uint64_t {
            return std::numeric_limits<std::uint64_t>::max() / 2;
          },
      },
      field);
}

InterposeResult attack_trojan_recover(std::span<const PulseRecord> probes_after_bob,
                                      std::span<const PulseRecord> stored_alice,
                                      const SessionConfig& cfg, const DetectorModel& eve_det,
                                      Rng& rng) {
  if (probes_after_bob.size() != stored_alice.size()) {
    throw std::invalid_argument("trojan: probe and stored pulse counts differ");
  }
  const std::size_t n = probes_after_bob.size();
  InterposeResult res;
  res.report.strategy = "trojan";
  res.inferences.assign(n, std::nullopt);
  res.pulses.reserve(n);

  std::vector<bool> learned(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& probe = probes_after_bob[k];
    const std::uint64_t photons = analyzer_photon_count(probe.field_H, eve_det.eta, rng) +
                                  analyzer_photon_count(probe.field_V, eve_det.eta, rng);
    learned[k] = photons >= 2 && probe.bob_phase.has_value();
    if (learned[k]) ++res.report.learned_phase_count;

    const QuarterPhase applied = learned[k] ? *probe.bob_phase : draw_bob_phase(rng);
    PulseRecord fwd = propagate(stored_alice[k], 1.0 - cfg.bob_tap_reflectance, rng);
    fwd.field_H = phase_modulate(fwd.field_H, applied.radians());
    fwd.field_V = phase_modulate(fwd.field_V, applied.radians());
    fwd.bob_phase = probe.bob_phase;
    res.pulses.push_back(std::move(fwd));

    if (k > 0 && learned[k] && learned[k - 1]) {
      res.inferences[k] = *probe.bob_phase - *probes_after_bob[k - 1].bob_phase;
    }
  }
  res.report.pairs_measured = n > 0 ? n - 1 : 0;
  res.report.notes = "probe=" + kind_name(probes_after_bob.empty() ? LightField{Vacuum{}}
                                                                    : probes_after_bob[0].field_H);
  return res;
}

std::vector<PulseRecord> attack_bright_light(std::span<const PulseRecord> returning,
                                             const BrightLight& attack) {
  std::vector<PulseRecord> out(returning.begin(), returning.end());
  for (auto& p : out) {
    p.field_H = Blinding{attack.forced_click_prob};
    p.field_V = Blinding{attack.forced_click_prob};
  }
  return out;
}

}  // namespace ctqkd

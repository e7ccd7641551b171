#include "ctqkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace ctqkd {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

double basis_offset(Basis b) { return b == Basis::A ? 0.0 : kHalfPi; }

std::complex<double> coherent_amplitude(const LightField& f) {
  if (const auto* c = std::get_if<Coherent>(&f)) return c->amplitude;
  return {0.0, 0.0};
}

}  // namespace

QuarterPhase QuarterPhase::from_radians(double phi) {
  if (!std::isfinite(phi)) throw std::invalid_argument("phase must be finite");
  const double turns = phi / kHalfPi;
  const double nearest = std::round(turns);
  if (std::abs(turns - nearest) * kHalfPi > 1e-9) {
    throw std::invalid_argument("phase " + std::to_string(phi) +
                                " is not one of 0, pi/2, pi, 3pi/2");
  }
  return QuarterPhase(static_cast<int>(std::fmod(nearest, 4.0)));
}

double QuarterPhase::radians() const { return q_ * kHalfPi; }

double PulseRecord::rotation() const { return rotated ? kHalfPi : 0.0; }

std::string to_string(Basis b) { return b == Basis::A ? "A" : "B"; }

std::string to_string(Port p) {
  switch (p) {
    case Port::D0: return "D0";
    case Port::D1: return "D1";
    case Port::None: return "none";
    case Port::Double: return "double";
  }
  return "?";
}

void SessionConfig::validate() const {
  const auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (n_pulses < 2) fail("n_pulses must be >= 2");
  if (!(mu_coherent >= 0.0) || !std::isfinite(mu_coherent)) fail("mu_coherent must be >= 0");
  if (!(mu_thermal >= 0.0) || !std::isfinite(mu_thermal)) fail("mu_thermal must be >= 0");
  if (!(channel_transmittance_oneway >= 0.0 && channel_transmittance_oneway <= 1.0)) {
    fail("channel_transmittance_oneway must lie in [0,1]");
  }
  if (!(bob_tap_reflectance >= 0.0 && bob_tap_reflectance < 1.0)) {
    fail("bob_tap_reflectance must lie in [0,1)");
  }
  detector_alice.validate();
  detector_bob.validate();
  if (!(z_threshold > 0.0)) fail("z_threshold must be > 0");
  if (!(qber_threshold >= 0.0 && qber_threshold <= 1.0)) fail("qber_threshold must lie in [0,1]");
  if (!(qber_sample_fraction > 0.0 && qber_sample_fraction < 1.0)) {
    fail("qber_sample_fraction must lie in (0,1)");
  }
}

double SessionConfig::expected_alice_thermal_mu() const {
  const double t = channel_transmittance_oneway;
  return mu_thermal * t * t * (1.0 - bob_tap_reflectance);
}

double SessionConfig::expected_alice_monitor_p() const {
  return click_prob_thermal(detector_alice, expected_alice_thermal_mu());
}

double SessionConfig::expected_bob_monitor_p() const {
  const double tap = detector_bob.eta * bob_tap_reflectance * channel_transmittance_oneway;
  const double q_coh = std::exp(-tap * mu_coherent);
  const double q_th = 1.0 / (1.0 + tap * mu_thermal);
  return 1.0 - (1.0 - detector_bob.p_d) * q_coh * q_th;
}

std::vector<PulseRecord> alice_prepare(const SessionConfig& cfg, Rng& rng) {
  cfg.validate();
  const LightField coherent = Coherent{{std::sqrt(cfg.mu_coherent), 0.0}};
  const LightField thermal = Thermal{cfg.mu_thermal};
  std::vector<PulseRecord> pulses(cfg.n_pulses);
  for (std::uint64_t i = 0; i < cfg.n_pulses; ++i) {
    PulseRecord& p = pulses[i];
    p.index = i;
    p.mode_assignment = bernoulli(rng, 0.5) ? 1 : 0;
    p.rotated = bernoulli(rng, 0.5);
    p.field_H = p.mode_assignment == 0 ? coherent : thermal;
    p.field_V = p.mode_assignment == 0 ? thermal : coherent;
  }
  return pulses;
}

std::pair<LightField, LightField> alice_separate_modes(const PulseRecord& pulse) {
  // Undo R(θ): at π/2 the polarization modes are exchanged.
  const LightField& a = pulse.rotated ? pulse.field_V : pulse.field_H;
  const LightField& b = pulse.rotated ? pulse.field_H : pulse.field_V;
  // Source orientation before the rotator.
  const bool coherent_on_a = (pulse.mode_assignment ^ static_cast<int>(pulse.rotated)) == 0;
  return coherent_on_a ? std::pair{a, b} : std::pair{b, a};
}

MonitorReading alice_thermal_monitor(std::span<const LightField> output2_fields,
                                     const SessionConfig& cfg, Rng& rng) {
  ClickStream clicks;
  for (const auto& field : output2_fields) {
    clicks.push_back(bernoulli(rng, click_probability(field, cfg.detector_alice)));
  }
  auto outcome = power_test(clicks, cfg.expected_alice_monitor_p(), cfg.z_threshold);
  return {std::move(clicks), outcome};
}

QuarterPhase draw_bob_phase(Rng& rng) { return QuarterPhase(uniform_int(rng, 4)); }

PulseRecord bob_modulate(const PulseRecord& pulse, double phi_b) {
  const QuarterPhase phase = QuarterPhase::from_radians(phi_b);
  PulseRecord out = pulse;
  out.field_H = phase_modulate(pulse.field_H, phase.radians());
  out.field_V = phase_modulate(pulse.field_V, phase.radians());
  out.bob_phase = phase;
  return out;
}

std::optional<MonitorReading> bob_monitor_tap(std::span<const PulseRecord> pulses_at_bob,
                                              const SessionConfig& cfg, Rng& rng) {
  const double r = cfg.bob_tap_reflectance;
  if (r == 0.0) return std::nullopt;
  ClickStream clicks;
  for (const auto& p : pulses_at_bob) {
    const std::array<LightField, 2> modes{p.field_H, p.field_V};
    clicks.push_back(bernoulli(rng, click_probability(modes, cfg.detector_bob, r)));
  }
  auto outcome = power_test(clicks, cfg.expected_bob_monitor_p(), cfg.z_threshold);
  return MonitorReading{std::move(clicks), outcome};
}

PulseRecord propagate(const PulseRecord& pulse, double transmittance, Rng& rng) {
  PulseRecord out = pulse;
  out.field_H = propagate_field(pulse.field_H, transmittance, rng);
  out.field_V = propagate_field(pulse.field_V, transmittance, rng);
  return out;
}

std::array<double, 4> interferometer_means(std::complex<double> a_prev,
                                           std::complex<double> a_cur) {
  std::array<double, 4> means{};
  for (int x = 0; x < 2; ++x) {
    const auto delayed = a_prev * std::polar(1.0, basis_offset(x == 0 ? Basis::A : Basis::B));
    means[2 * x] = std::norm(a_cur + delayed) / 8.0;
    means[2 * x + 1] = std::norm(a_cur - delayed) / 8.0;
  }
  return means;
}

std::array<double, 4> interferometer_click_probs(const LightField& prev, const LightField& cur,
                                                 const DetectorModel& det) {
  const auto means = interferometer_means(coherent_amplitude(prev), coherent_amplitude(cur));
  // Each non-coherent pulse reaches every detector of the slot with weight 1/8.
  double incoherent = 1.0;
  for (const LightField* f : {&prev, &cur}) {
    if (!is_coherent(*f)) incoherent *= no_click_factor(*f, det.eta, 1.0 / 8.0);
  }
  std::array<double, 4> probs{};
  for (int d = 0; d < 4; ++d) {
    probs[d] = 1.0 - (1.0 - det.p_d) * std::exp(-det.eta * means[d]) * incoherent;
  }
  return probs;
}

InterferometerEvent interferometer_measure(const PulseRecord& prev, const PulseRecord& cur,
                                           const SessionConfig& cfg, Rng& rng) {
  const auto probs = interferometer_click_probs(alice_separate_modes(prev).first,
                                                alice_separate_modes(cur).first,
                                                cfg.detector_alice);
  InterferometerEvent ev;
  ev.pair_index = cur.index;
  ev.delta_phi = cur.bob_phase.value_or(QuarterPhase{}) - prev.bob_phase.value_or(QuarterPhase{});
  int n_clicks = 0;
  int last = -1;
  for (int d = 0; d < 4; ++d) {
    if (bernoulli(rng, probs[d])) {
      ++n_clicks;
      last = d;
    }
  }
  if (n_clicks == 0) {
    ev.port = Port::None;
  } else if (n_clicks > 1) {
    ev.port = Port::Double;
  } else {
    ev.basis = last < 2 ? Basis::A : Basis::B;
    ev.port = last % 2 == 0 ? Port::D0 : Port::D1;
  }
  return ev;
}

std::optional<std::uint8_t> bob_bit(QuarterPhase delta_phi, Basis b) {
  const int rel = (delta_phi - QuarterPhase(b == Basis::A ? 0 : 1)).quarters();
  if (rel == 0) return 0;
  if (rel == 2) return 1;
  return std::nullopt;
}

SiftOutcome sift_and_qber(std::span<const InterferometerEvent> events, const SessionConfig& cfg,
                          Rng& rng) {
  SiftOutcome out;
  std::vector<std::uint8_t> alice_bits;
  for (const auto& ev : events) {
    if (ev.port != Port::D0 && ev.port != Port::D1) continue;
    const auto bit = bob_bit(ev.delta_phi, ev.basis);
    if (!bit) continue;
    out.sifted_pairs.push_back(ev.pair_index);
    out.sifted_bob_bits.push_back(*bit);
    out.sifted_bases.push_back(ev.basis);
    alice_bits.push_back(ev.port == Port::D1 ? 1 : 0);
  }
  const std::size_t n = alice_bits.size();
  for (std::size_t i = 0; i < n; ++i) {
    out.full_key_errors += alice_bits[i] != out.sifted_bob_bits[i] ? 1 : 0;
  }
  if (n == 0) {
    out.error = "empty sifted key";
    return out;
  }

  auto m = static_cast<std::size_t>(std::llround(cfg.qber_sample_fraction * static_cast<double>(n)));
  m = std::clamp<std::size_t>(m, 1, n);
  // Partial Fisher-Yates: the first m entries of `order` are the disclosed sample.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<bool> disclosed(n, false);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n - i));
    std::swap(order[i], order[j]);
    disclosed[order[i]] = true;
    out.disclosed_errors += alice_bits[order[i]] != out.sifted_bob_bits[order[i]] ? 1 : 0;
  }
  out.disclosed = m;
  out.qber = static_cast<double>(out.disclosed_errors) / static_cast<double>(m);
  for (std::size_t i = 0; i < n; ++i) {
    if (disclosed[i]) continue;
    out.alice_key.push_back(alice_bits[i]);
    out.bob_key.push_back(out.sifted_bob_bits[i]);
  }
  return out;
}

}  // namespace ctqkd

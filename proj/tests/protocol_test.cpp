#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ctqkd/protocol.hpp"
#include "ctqkd/session.hpp"

using namespace ctqkd;

namespace {

constexpr double kPi = std::numbers::pi;

// Survival function of chi-square with 3 degrees of freedom.
double chi2_sf_df3(double x) {
  return std::erfc(std::sqrt(x / 2)) + std::sqrt(2 * x / kPi) * std::exp(-x / 2);
}

InterferometerEvent event(std::uint64_t k, Basis b, Port p, int dphi) {
  InterferometerEvent ev;
  ev.pair_index = k;
  ev.basis = b;
  ev.port = p;
  ev.delta_phi = QuarterPhase(dphi);
  return ev;
}

}  // namespace

TEST(Protocol, QuarterPhaseFromRadians) {
  EXPECT_EQ(QuarterPhase::from_radians(0).quarters(), 0);
  EXPECT_EQ(QuarterPhase::from_radians(kPi / 2).quarters(), 1);
  EXPECT_EQ(QuarterPhase::from_radians(kPi).quarters(), 2);
  EXPECT_EQ(QuarterPhase::from_radians(3 * kPi / 2).quarters(), 3);
  EXPECT_EQ(QuarterPhase::from_radians(2 * kPi).quarters(), 0);
  EXPECT_EQ(QuarterPhase::from_radians(-kPi / 2).quarters(), 3);
  EXPECT_THROW(QuarterPhase::from_radians(0.1), std::invalid_argument);
  EXPECT_EQ((QuarterPhase(1) - QuarterPhase(3)).quarters(), 2);
  EXPECT_EQ((QuarterPhase(3) + QuarterPhase(2)).quarters(), 1);
}

TEST(Protocol, SeparationRoutesCoherentToOutputOneInAllFourCases) {
  const LightField coh = Coherent{{0.4, 0.0}};
  const LightField th = Thermal{0.2};
  for (int assign = 0; assign < 2; ++assign) {
    for (bool rotated : {false, true}) {
      PulseRecord p;
      p.mode_assignment = assign;
      p.rotated = rotated;
      p.field_H = assign == 0 ? coh : th;
      p.field_V = assign == 0 ? th : coh;
      const auto [out1, out2] = alice_separate_modes(p);
      EXPECT_EQ(out1, coh) << assign << rotated;
      EXPECT_EQ(out2, th) << assign << rotated;
    }
  }
}

TEST(Protocol, PreparedPulsesUseAllFourSettings) {
  SessionConfig cfg;
  cfg.n_pulses = 4000;
  Rng rng = derive_rng(3, 1);
  const auto pulses = alice_prepare(cfg, rng);
  int counts[2][2] = {};
  for (const auto& p : pulses) {
    ++counts[p.mode_assignment][p.rotated];
    EXPECT_EQ(alice_separate_modes(p).first, (LightField{Coherent{{std::sqrt(0.2), 0.0}}}));
    EXPECT_FALSE(p.bob_phase.has_value());
  }
  for (auto& row : counts)
    for (int c : row) EXPECT_NEAR(c, 1000, 5 * std::sqrt(750.0));
}

TEST(Protocol, InterferometerConservesEnergy) {
  Rng rng = derive_rng(11, 0);
  for (int i = 0; i < 200; ++i) {
    const std::complex<double> a(uniform01(rng) - 0.5, uniform01(rng) - 0.5);
    const std::complex<double> b(uniform01(rng) - 0.5, uniform01(rng) - 0.5);
    const auto m = interferometer_means(a, b);
    EXPECT_NEAR(m[0] + m[1] + m[2] + m[3], (std::norm(a) + std::norm(b)) / 2, 1e-15);
  }
}

TEST(Protocol, InterferometerPortsFollowPhaseDifference) {
  const double amp = 1.0;
  // Δφ = 0, π/2, π, 3π/2 -> dark ports D1_A, D1_B, D0_A, D0_B respectively.
  const int dark[4] = {1, 3, 0, 2};
  for (int q = 0; q < 4; ++q) {
    const auto m = interferometer_means(amp, std::polar(amp, q * kPi / 2));
    EXPECT_NEAR(m[dark[q]], 0.0, 1e-15) << q;
    EXPECT_NEAR(m[0] + m[1] + m[2] + m[3], 1.0, 1e-15);
    const auto bit_basis = q % 2 == 0 ? Basis::A : Basis::B;
    const int lit_port = (dark[q] % 2 == 0) ? 1 : 0;
    EXPECT_EQ(bob_bit(QuarterPhase(q), bit_basis), lit_port);
  }
}

TEST(Protocol, BobBitTable) {
  EXPECT_EQ(bob_bit(QuarterPhase(0), Basis::A), 0);
  EXPECT_EQ(bob_bit(QuarterPhase(2), Basis::A), 1);
  EXPECT_EQ(bob_bit(QuarterPhase(1), Basis::A), std::nullopt);
  EXPECT_EQ(bob_bit(QuarterPhase(1), Basis::B), 0);
  EXPECT_EQ(bob_bit(QuarterPhase(3), Basis::B), 1);
  EXPECT_EQ(bob_bit(QuarterPhase(0), Basis::B), std::nullopt);
}

TEST(Protocol, NonCoherentContentSplitsEvenly) {
  const DetectorModel det{1.0, 0.0};
  const auto probs = interferometer_click_probs(Thermal{0.8}, Vacuum{}, det);
  for (double p : probs) EXPECT_NEAR(p, 1 - 1 / (1 + 0.1), 1e-15);
  const auto blind = interferometer_click_probs(Blinding{1.0}, Vacuum{}, det);
  for (double p : blind) EXPECT_DOUBLE_EQ(p, 1.0);
}

TEST(Protocol, BobModulation) {
  PulseRecord p;
  p.field_H = Coherent{{0.5, 0.0}};
  p.field_V = Thermal{0.2};
  const auto out = bob_modulate(p, kPi / 2);
  EXPECT_NEAR(std::abs(std::get<Coherent>(out.field_H).amplitude - std::complex<double>(0, 0.5)), 0, 1e-15);
  EXPECT_EQ(out.field_V, p.field_V);
  EXPECT_EQ(out.bob_phase, QuarterPhase(1));
  EXPECT_THROW(bob_modulate(p, 0.7), std::invalid_argument);
}

TEST(Protocol, SiftingKeepsMatchingBasesOnly) {
  SessionConfig cfg;
  cfg.qber_sample_fraction = 0.5;
  const std::vector<InterferometerEvent> events = {
      event(1, Basis::A, Port::D0, 0),      // bit 0, correct
      event(2, Basis::A, Port::D1, 2),      // bit 1, correct
      event(3, Basis::B, Port::D0, 0),      // wrong basis
      event(4, Basis::B, Port::D1, 3),      // bit 1, correct
      event(5, Basis::A, Port::None, 0),    // no click
      event(6, Basis::A, Port::Double, 0),  // double click
      event(7, Basis::A, Port::D1, 0),      // error
  };
  Rng rng = derive_rng(1, 9);
  const auto s = sift_and_qber(events, cfg, rng);
  EXPECT_EQ(s.sifted_pairs, (std::vector<std::uint64_t>{1, 2, 4, 7}));
  EXPECT_EQ(s.sifted_bob_bits, (std::vector<std::uint8_t>{0, 1, 1, 0}));
  EXPECT_EQ(s.full_key_errors, 1u);
  EXPECT_EQ(s.disclosed, 2u);
  EXPECT_EQ(s.alice_key.size(), 2u);
  ASSERT_TRUE(s.qber.has_value());
  EXPECT_DOUBLE_EQ(*s.qber, s.disclosed_errors / 2.0);

  const std::vector<InterferometerEvent> none = {event(1, Basis::A, Port::None, 0)};
  const auto empty = sift_and_qber(none, cfg, rng);
  EXPECT_FALSE(empty.qber.has_value());
  EXPECT_EQ(empty.error, "empty sifted key");
}

TEST(Protocol, ThermalMonitorIndependentOfBobPhase) {
  SessionConfig cfg;
  cfg.n_pulses = 200000;
  cfg.mu_thermal = 1.0;
  cfg.detector_alice = {0.5, 1e-5};
  Rng alice = derive_rng(5, 1), chan = derive_rng(5, 2), bob = derive_rng(5, 3), mon = derive_rng(5, 4);
  auto pulses = alice_prepare(cfg, alice);
  std::vector<LightField> out2;
  std::vector<int> phase;
  for (auto& p : pulses) {
    p = propagate(p, 0.9, chan);
    p = bob_modulate(p, draw_bob_phase(bob).radians());
    p = propagate(p, 0.9, chan);
    phase.push_back(p.bob_phase->quarters());
    out2.push_back(alice_separate_modes(p).second);
  }
  const auto reading = alice_thermal_monitor(out2, cfg, mon);
  double table[4][2] = {};
  for (std::size_t i = 0; i < phase.size(); ++i) table[phase[i]][reading.clicks[i] ? 1 : 0] += 1;
  double col[2] = {}, row[4] = {};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) {
      row[i] += table[i][j];
      col[j] += table[i][j];
    }
  const double n = static_cast<double>(phase.size());
  double chi2 = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) {
      const double e = row[i] * col[j] / n;
      chi2 += (table[i][j] - e) * (table[i][j] - e) / e;
    }
  EXPECT_GT(chi2_sf_df3(chi2), 1e-3) << chi2;
  EXPECT_GT(col[1], 1000);
}

TEST(Protocol, HonestMonitorExpectations) {
  SessionConfig cfg;
  EXPECT_NEAR(cfg.expected_alice_thermal_mu(), 0.2 * 0.81 * 0.95, 1e-15);
  EXPECT_NEAR(cfg.expected_alice_monitor_p(), 1 - (1 - 1e-5) / (1 + 0.1 * 0.1539), 1e-15);
  const double tap = 0.1 * 0.05 * 0.9;
  EXPECT_NEAR(cfg.expected_bob_monitor_p(), 1 - (1 - 1e-5) * std::exp(-tap * 0.2) / (1 + tap * 0.2), 1e-15);
}

TEST(Protocol, TapDisabledAtZeroReflectance) {
  SessionConfig cfg;
  cfg.bob_tap_reflectance = 0.0;
  cfg.n_pulses = 200;
  Rng rng = derive_rng(1, 1);
  const auto pulses = alice_prepare(cfg, rng);
  EXPECT_FALSE(bob_monitor_tap(pulses, cfg, rng).has_value());
}

TEST(Protocol, HonestSessionHasLowErrorRate) {
  SessionConfig cfg;
  const auto r = run_session(cfg);
  ASSERT_TRUE(r.qber.has_value());
  EXPECT_LT(*r.qber, 0.01);
  EXPECT_LT(r.full_key_error_rate, 0.01);
  EXPECT_EQ(r.alarm, Alarm::None);
  EXPECT_EQ(r.sifted_key_alice.size(), r.sifted_key_bob.size());
  EXPECT_GT(r.counts.sifted, 100u);
}

TEST(Protocol, ValidatesConfig) {
  SessionConfig cfg;
  cfg.channel_transmittance_oneway = 1.2;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.qber_sample_fraction = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.n_pulses = 50;
  EXPECT_THROW(run_session(cfg), std::invalid_argument);
}

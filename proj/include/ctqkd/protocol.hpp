#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctqkd/detector.hpp"
#include "ctqkd/light_field.hpp"
#include "ctqkd/rng.hpp"

namespace ctqkd {

/// A multiple of π/2, kept as an integer in [0,4) so phase bookkeeping is exact.
class QuarterPhase {
 public:
  constexpr QuarterPhase() = default;
  constexpr explicit QuarterPhase(int quarters) : q_(((quarters % 4) + 4) % 4) {}

  /// Accepts only 0, π/2, π, 3π/2 (mod 2π) within 1e-9.
  static QuarterPhase from_radians(double phi);

  constexpr int quarters() const { return q_; }
  double radians() const;

  friend constexpr QuarterPhase operator-(QuarterPhase a, QuarterPhase b) {
    return QuarterPhase(a.q_ - b.q_);
  }
  friend constexpr QuarterPhase operator+(QuarterPhase a, QuarterPhase b) {
    return QuarterPhase(a.q_ + b.q_);
  }
  friend constexpr bool operator==(QuarterPhase, QuarterPhase) = default;

 private:
  int q_ = 0;
};

struct PulseRecord {
  std::uint64_t index = 0;
  int mode_assignment = 0;  // 0: coherent in H, 1: coherent in V
  bool rotated = false;     // Alice's rotator at π/2 instead of 0
  LightField field_H = Vacuum{};
  LightField field_V = Vacuum{};
  std::optional<QuarterPhase> bob_phase;

  double rotation() const;
  friend bool operator==(const PulseRecord&, const PulseRecord&) = default;
};

struct SessionConfig {
  std::uint64_t n_pulses = 100000;
  double mu_coherent = 0.2;  // |α|², known only to Alice until announced
  double mu_thermal = 0.2;   // μ_t
  double channel_transmittance_oneway = 0.9;
  double bob_tap_reflectance = 0.05;
  DetectorModel detector_alice{0.1, 1e-5};
  DetectorModel detector_bob{0.1, 1e-5};
  double z_threshold = 5.0;
  double qber_threshold = 0.05;
  double qber_sample_fraction = 0.5;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;

  /// Thermal mean at Alice's monitor for an honest round trip.
  double expected_alice_thermal_mu() const;
  double expected_alice_monitor_p() const;
  /// D_B² click probability from Alice's announced μ values.
  double expected_bob_monitor_p() const;
};

enum class Basis { A, B };  // interferometer offsets 0 and π/2
enum class Port { D0, D1, None, Double };

std::string to_string(Basis b);
std::string to_string(Port p);

struct InterferometerEvent {
  std::uint64_t pair_index = 0;  // index of the later pulse of the pair
  Basis basis = Basis::A;        // meaningful for single clicks only
  Port port = Port::None;
  QuarterPhase delta_phi;        // Bob-side ground truth φ_k - φ_{k-1}
};

/// One detector's gate record together with its frequency test.
struct MonitorReading {
  ClickStream clicks;
  PowerTestOutcome outcome;
};

struct SiftOutcome {
  std::vector<std::uint8_t> alice_key;  // after removal of the disclosed sample
  std::vector<std::uint8_t> bob_key;
  std::vector<std::uint64_t> sifted_pairs;  // pair_index of every sifted event
  std::vector<std::uint8_t> sifted_bob_bits;
  std::vector<Basis> sifted_bases;
  std::uint64_t disclosed = 0;
  std::uint64_t disclosed_errors = 0;
  std::optional<double> qber;  // nullopt when nothing could be disclosed
  std::uint64_t full_key_errors = 0;  // simulator ground truth over all sifted bits
  std::string error;
};

// Alice ----------------------------------------------------------------------

std::vector<PulseRecord> alice_prepare(const SessionConfig& cfg, Rng& rng);

/// Applies the inverse rotation and routes by Alice's secret: output1 gets
/// the mode she assigned the coherent state to, output2 the other.
std::pair<LightField, LightField> alice_separate_modes(const PulseRecord& pulse);

MonitorReading alice_thermal_monitor(std::span<const LightField> output2_fields,
                                     const SessionConfig& cfg, Rng& rng);

// Bob ------------------------------------------------------------------------

QuarterPhase draw_bob_phase(Rng& rng);

/// Throws std::invalid_argument for a phase outside {0, π/2, π, 3π/2}.
PulseRecord bob_modulate(const PulseRecord& pulse, double phi_b);

/// nullopt when the tap reflectance is 0 (monitor disabled).
std::optional<MonitorReading> bob_monitor_tap(std::span<const PulseRecord> pulses_at_bob,
                                              const SessionConfig& cfg, Rng& rng);

// Channel ----------------------------------------------------------------------

PulseRecord propagate(const PulseRecord& pulse, double transmittance, Rng& rng);

// Interferometers --------------------------------------------------------------

/// Mean photons at (D0_A, D1_A, D0_B, D1_B) for two coherent pulses;
/// their sum is (|a_prev|² + |a_cur|²)/2.
std::array<double, 4> interferometer_means(std::complex<double> a_prev,
                                           std::complex<double> a_cur);

/// Click probabilities of (D0_A, D1_A, D0_B, D1_B) for arbitrary output1
/// contents. Coherent amplitudes interfere; other contents split evenly.
std::array<double, 4> interferometer_click_probs(const LightField& prev, const LightField& cur,
                                                 const DetectorModel& det);

InterferometerEvent interferometer_measure(const PulseRecord& prev, const PulseRecord& cur,
                                           const SessionConfig& cfg, Rng& rng);

// Sifting ----------------------------------------------------------------------

/// Bob's key bit for Δφ in basis `b`, or nullopt when Δφ is not in that basis.
std::optional<std::uint8_t> bob_bit(QuarterPhase delta_phi, Basis b);

SiftOutcome sift_and_qber(std::span<const InterferometerEvent> events, const SessionConfig& cfg,
                          Rng& rng);

}  // namespace ctqkd

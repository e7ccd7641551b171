#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctqkd/attacks.hpp"
#include "ctqkd/detector.hpp"
#include "ctqkd/session.hpp"

namespace ctqkd {

struct DistinguishPoint {
  std::uint64_t n = 0;
  double discrimination_error = 0.0;
};

struct DistinguishCurve {
  double p_thermal = 0.0;
  double p_coherent = 0.0;
  double single_shot_bayes_error = 0.0;
  std::optional<std::uint64_t> n_star;  // samples_needed(P_t, P_c, z)
  std::vector<DistinguishPoint> points;
};

/// Monte Carlo error of deciding "thermal" vs "coherent" from n clicks of one
/// source, thresholding the click frequency at the midpoint of P_t and P_c
/// (fair coin on ties). Equal priors; `trials` samples per hypothesis.
DistinguishCurve distinguishability_curve(double mu_t, double mu_c, const DetectorModel& det,
                                          double z, std::span<const std::uint64_t> n_grid,
                                          std::uint64_t trials, std::uint64_t seed);

struct SweepSpec {
  std::string parameter;
  std::vector<double> values;
  SessionConfig base;
  AttackConfig attack;
  std::uint64_t seeds_per_point = 1;

  void validate() const;
};

struct CurvePoint {
  double x = 0.0;
  double alarm_rate = 0.0;
  double mean_qber = 0.0;
  double mean_z_alice = 0.0;
  double mean_z_bob = 0.0;
  double key_rate = 0.0;  // sifted bits per pulse
  std::uint64_t sessions = 0;
  std::uint64_t failures = 0;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/// Parameters a sweep can vary. Session: n_pulses, mu_coherent, mu_thermal,
/// transmittance, tap_reflectance, eta_alice, p_d_alice, eta_bob, p_d_bob,
/// z_threshold, qber_threshold, qber_sample_fraction. Attack: resend_mu,
/// tap_fraction, forced_click_prob, probe_mu.
const std::vector<std::string>& sweep_parameters();

/// Throws std::invalid_argument for an unknown name or an attack parameter
/// that does not belong to `attack`'s strategy.
void apply_sweep_parameter(const std::string& name, double value, SessionConfig& cfg,
                           AttackConfig& attack);

/// One point per grid value in grid order; seeds base.seed .. base.seed+k-1
/// at every point.
std::vector<CurvePoint> run_sweep(const SweepSpec& spec);

CurvePoint aggregate(double x, std::span<const SessionResult> results, std::uint64_t failures);

}  // namespace ctqkd

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctqkd/fock.hpp"
#include "ctqkd/rng.hpp"

namespace ctqkd {

/// Threshold (click / no-click) single-photon detector.
struct DetectorModel {
  double eta = 0.1;   // quantum efficiency
  double p_d = 1e-5;  // dark-count probability per gate

  void validate() const;
};

/// Gate-by-gate avalanche record of one detector.
class ClickStream {
 public:
  ClickStream() = default;
  explicit ClickStream(std::vector<bool> clicks) : clicks_(std::move(clicks)) {}

  std::size_t n_gates() const { return clicks_.size(); }
  bool operator[](std::size_t i) const { return clicks_[i]; }
  const std::vector<bool>& clicks() const { return clicks_; }
  std::size_t count() const;
  double frequency() const;

  void push_back(bool click) { clicks_.push_back(click); }

  /// Run-length text form: "T3F12T1" (value letter then run length).
  /// The empty stream encodes as "".
  std::string to_rle() const;
  static ClickStream from_rle(std::string_view text);

  friend bool operator==(const ClickStream&, const ClickStream&) = default;

 private:
  std::vector<bool> clicks_;
};

struct PowerTestOutcome {
  double observed_stat = 0.0;  // P̂(1-P̂)
  double expected_stat = 0.0;  // p(1-p)
  double z_score = 0.0;
  bool pass = true;
  std::uint64_t n_gates = 0;
  double observed_p = 0.0;
  double expected_p = 0.0;

  /// "observed_stat,expected_stat,z_score,pass,n_gates"
  static std::string csv_header();
  std::string csv_row() const;
};

// Click probabilities, no afterpulsing.
double click_prob_thermal(const DetectorModel& det, double mu_t);
double click_prob_coherent(const DetectorModel& det, double mu);
double click_prob_fock(const DetectorModel& det, int n);
/// 1 - (1-p_d) Σ_n ρ_nn (1-η)^n
double click_prob_state(const DetectorModel& det, const DensityMatrix& rho);

ClickStream sample_clicks(double p_click, std::size_t n_gates, Rng& rng);

/// P̂(1-P̂): the fixed-band electrical power up to a constant factor.
double band_power_statistic(const ClickStream& stream);

PowerTestOutcome power_test(const ClickStream& stream, double expected_p,
                            double z_threshold);

/// Smallest n with |p_a-p_b| >= z(sqrt(p_a(1-p_a)/n) + sqrt(p_b(1-p_b)/n)).
/// nullopt when p_a == p_b (no finite sample separates them).
std::optional<std::uint64_t> samples_needed(double p_a, double p_b, double z);

}  // namespace ctqkd

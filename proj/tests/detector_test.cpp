#include <gtest/gtest.h>

#include <cmath>

#include "ctqkd/detector.hpp"

using namespace ctqkd;

namespace {

// Smallest n meeting the separation condition, by doubling and bisection.
std::uint64_t brute_samples_needed(double pa, double pb, double z) {
  const auto ok = [&](std::uint64_t n) {
    const double nn = static_cast<double>(n);
    return std::abs(pa - pb) >= z * (std::sqrt(pa * (1 - pa) / nn) + std::sqrt(pb * (1 - pb) / nn));
  };
  std::uint64_t hi = 1;
  while (!ok(hi)) hi *= 2;
  std::uint64_t lo = hi / 2;
  while (lo + 1 < hi) {
    const auto mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

// Photon-number sum for a threshold detector, truncated far in the tail.
double series_click_prob(const DetectorModel& d, const DensityMatrix& rho) {
  double none = 0.0;
  for (int n = 0; n <= rho.n_max(); ++n) none += rho(n, n).real() * std::pow(1 - d.eta, n);
  return 1 - (1 - d.p_d) * none;
}

}  // namespace

TEST(Detector, ClosedFormsMatchPhotonSums) {
  for (const DetectorModel d : {DetectorModel{0.1, 1e-5}, DetectorModel{1.0, 0.0}, DetectorModel{0.5, 0.01}}) {
    for (double mu : {0.0, 0.05, 0.2, 1.0}) {
      EXPECT_NEAR(click_prob_thermal(d, mu), 1 - (1 - d.p_d) / (1 + d.eta * mu), 1e-15);
      EXPECT_NEAR(click_prob_coherent(d, mu), 1 - std::exp(-d.eta * mu) * (1 - d.p_d), 1e-15);
      EXPECT_NEAR(click_prob_state(d, thermal_state(mu)), click_prob_thermal(d, mu), 1e-9);
      EXPECT_NEAR(click_prob_state(d, coherent_state({std::sqrt(mu), 0.0})), click_prob_coherent(d, mu), 1e-9);
      EXPECT_NEAR(click_prob_state(d, thermal_state(mu)), series_click_prob(d, thermal_state(mu)), 1e-14);
    }
    EXPECT_NEAR(click_prob_fock(d, 3), 1 - (1 - d.p_d) * std::pow(1 - d.eta, 3), 1e-15);
  }
}

TEST(Detector, VacuumClicksOnlyOnDarkCounts) {
  const DetectorModel d{0.1, 1e-5};
  EXPECT_NEAR(click_prob_thermal(d, 0.0), 1e-5, 1e-15);
  EXPECT_NEAR(click_prob_coherent(d, 0.0), 1e-5, 1e-15);
  EXPECT_NEAR(click_prob_fock(d, 0), 1e-5, 1e-15);
}

TEST(Detector, SamplesNeededMatchesSearch) {
  EXPECT_EQ(samples_needed(0.16667, 0.18127, 3), 24255u);
  EXPECT_EQ(samples_needed(0.16667, 0.18127, 3), brute_samples_needed(0.16667, 0.18127, 3));
  for (double z : {1.0, 3.0, 5.0}) {
    EXPECT_EQ(samples_needed(0.2, 0.3, z), brute_samples_needed(0.2, 0.3, z));
    EXPECT_EQ(samples_needed(0.015, 0.0076, z), brute_samples_needed(0.015, 0.0076, z));
    EXPECT_EQ(samples_needed(0.3, 0.2, z), samples_needed(0.2, 0.3, z));
  }
  EXPECT_EQ(samples_needed(0.2, 0.2, 3), std::nullopt);
  EXPECT_THROW(samples_needed(0.0, 0.2, 3), std::invalid_argument);
  EXPECT_THROW(samples_needed(0.1, 0.2, 0), std::invalid_argument);
}

TEST(Detector, BandStatistic) {
  EXPECT_DOUBLE_EQ(band_power_statistic(ClickStream(std::vector<bool>(100, true))), 0.0);
  EXPECT_DOUBLE_EQ(band_power_statistic(ClickStream(std::vector<bool>(100, false))), 0.0);
  std::vector<bool> half(100);
  for (std::size_t i = 0; i < half.size(); i += 2) half[i] = true;
  EXPECT_DOUBLE_EQ(band_power_statistic(ClickStream(half)), 0.25);
  EXPECT_THROW(band_power_statistic(ClickStream({true})), std::invalid_argument);
}

TEST(Detector, PowerTest) {
  std::vector<bool> v(10000, false);
  for (int i = 0; i < 200; ++i) v[i * 50] = true;  // P̂ = 0.02
  const auto ok = power_test(ClickStream(v), 0.02, 5.0);
  EXPECT_TRUE(ok.pass);
  EXPECT_NEAR(ok.z_score, 0.0, 1e-12);
  EXPECT_NEAR(ok.observed_stat, 0.02 * 0.98, 1e-15);
  const auto bad = power_test(ClickStream(v), 0.01, 5.0);
  EXPECT_FALSE(bad.pass);
  EXPECT_NEAR(bad.z_score, 0.01 / std::sqrt(0.01 * 0.99 / 10000), 1e-9);
  EXPECT_THROW(power_test(ClickStream(std::vector<bool>(99, false)), 0.01, 5.0), std::invalid_argument);
  EXPECT_THROW(power_test(ClickStream(v), 0.0, 5.0), std::invalid_argument);
  EXPECT_EQ(PowerTestOutcome::csv_header(), "observed_stat,expected_stat,z_score,pass,n_gates");
}

TEST(Detector, SampledFrequencyWithinThreeSigma) {
  const double p = 0.015;
  const std::size_t n = 100000;
  int inside = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Rng rng = derive_rng(seed, 7);
    const double f = sample_clicks(p, n, rng).frequency();
    if (std::abs(f - p) <= 3 * std::sqrt(p * (1 - p) / n)) ++inside;
  }
  EXPECT_GE(inside, 48);
}

TEST(Detector, SamplingIsDeterministic) {
  Rng a = derive_rng(42, 1);
  Rng b = derive_rng(42, 1);
  EXPECT_EQ(sample_clicks(0.3, 1000, a), sample_clicks(0.3, 1000, b));
  Rng c = derive_rng(42, 2);
  Rng d = derive_rng(42, 1);
  EXPECT_NE(sample_clicks(0.3, 1000, c), sample_clicks(0.3, 1000, d));
}

TEST(Detector, RunLengthText) {
  ClickStream s({true, true, true, false, false, true});
  EXPECT_EQ(s.to_rle(), "T3F2T1");
  EXPECT_EQ(ClickStream::from_rle("T3F2T1"), s);
  EXPECT_EQ(ClickStream().to_rle(), "");
  EXPECT_EQ(ClickStream::from_rle("").n_gates(), 0u);
  EXPECT_THROW(ClickStream::from_rle("X3"), std::invalid_argument);
  EXPECT_THROW(ClickStream::from_rle("T"), std::invalid_argument);
  EXPECT_THROW(ClickStream().frequency(), std::invalid_argument);
}

TEST(Detector, ValidatesModel) {
  EXPECT_THROW((DetectorModel{1.5, 0.0}.validate()), std::invalid_argument);
  EXPECT_THROW((DetectorModel{0.5, 1.0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((DetectorModel{0.0, 0.0}.validate()));
}

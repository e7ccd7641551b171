#include "ctqkd/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ctqkd/format.hpp"

namespace ctqkd {

void DetectorModel::validate() const {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("detector eta must lie in [0,1]");
  if (!(p_d >= 0.0 && p_d < 1.0)) throw std::invalid_argument("detector p_d must lie in [0,1)");
}

std::size_t ClickStream::count() const {
  return static_cast<std::size_t>(std::count(clicks_.begin(), clicks_.end(), true));
}

double ClickStream::frequency() const {
  if (clicks_.empty()) throw std::invalid_argument("empty click stream");
  return static_cast<double>(count()) / static_cast<double>(clicks_.size());
}

std::string ClickStream::to_rle() const {
  std::string out;
  std::size_t i = 0;
  while (i < clicks_.size()) {
    const bool value = clicks_[i];
    std::size_t run = 0;
    while (i < clicks_.size() && clicks_[i] == value) {
      ++run;
      ++i;
    }
    out += value ? 'T' : 'F';
    out += std::to_string(run);
  }
  return out;
}

ClickStream ClickStream::from_rle(std::string_view text) {
  std::vector<bool> clicks;
  std::size_t i = 0;
  while (i < text.size()) {
    const char tag = text[i++];
    if (tag != 'T' && tag != 'F') throw std::invalid_argument("rle: expected T or F");
    std::size_t run = 0;
    std::size_t digits = 0;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
      run = run * 10 + static_cast<std::size_t>(text[i] - '0');
      ++i;
      ++digits;
    }
    if (digits == 0 || run == 0) throw std::invalid_argument("rle: missing run length");
    clicks.insert(clicks.end(), run, tag == 'T');
  }
  return ClickStream(std::move(clicks));
}

std::string PowerTestOutcome::csv_header() {
  return "observed_stat,expected_stat,z_score,pass,n_gates";
}

std::string PowerTestOutcome::csv_row() const {
  return format_g6(observed_stat) + "," + format_g6(expected_stat) + "," +
         format_g6(z_score) + "," + (pass ? "1" : "0") + "," + std::to_string(n_gates);
}

double click_prob_thermal(const DetectorModel& det, double mu_t) {
  if (!(mu_t >= 0.0)) throw std::invalid_argument("click_prob_thermal: mu_t must be >= 0");
  return 1.0 - (1.0 - det.p_d) / (1.0 + det.eta * mu_t);
}

double click_prob_coherent(const DetectorModel& det, double mu) {
  if (!(mu >= 0.0)) throw std::invalid_argument("click_prob_coherent: mu must be >= 0");
  return 1.0 - std::exp(-det.eta * mu) * (1.0 - det.p_d);
}

double click_prob_fock(const DetectorModel& det, int n) {
  if (n < 0) throw std::invalid_argument("click_prob_fock: n must be >= 0");
  return 1.0 - (1.0 - det.p_d) * std::pow(1.0 - det.eta, n);
}

double click_prob_state(const DetectorModel& det, const DensityMatrix& rho) {
  double no_click = 0.0;
  double miss = 1.0;
  for (int n = 0; n < rho.dim(); ++n) {
    no_click += rho(n, n).real() * miss;
    miss *= 1.0 - det.eta;
  }
  return 1.0 - (1.0 - det.p_d) * no_click;
}

ClickStream sample_clicks(double p_click, std::size_t n_gates, Rng& rng) {
  if (!(p_click >= 0.0 && p_click <= 1.0)) {
    throw std::invalid_argument("sample_clicks: p_click must lie in [0,1]");
  }
  if (n_gates < 1) throw std::invalid_argument("sample_clicks: n_gates must be >= 1");
  std::vector<bool> clicks(n_gates);
  for (std::size_t i = 0; i < n_gates; ++i) clicks[i] = bernoulli(rng, p_click);
  return ClickStream(std::move(clicks));
}

double band_power_statistic(const ClickStream& stream) {
  if (stream.n_gates() < 2) {
    throw std::invalid_argument("band_power_statistic: need at least 2 gates");
  }
  const double p = stream.frequency();
  return p * (1.0 - p);
}

PowerTestOutcome power_test(const ClickStream& stream, double expected_p,
                            double z_threshold) {
  if (!(expected_p > 0.0 && expected_p < 1.0)) {
    throw std::invalid_argument("power_test: expected_p must lie strictly inside (0,1)");
  }
  if (stream.n_gates() < 100) throw std::invalid_argument("power_test: need at least 100 gates");
  PowerTestOutcome out;
  out.n_gates = stream.n_gates();
  out.observed_p = stream.frequency();
  out.expected_p = expected_p;
  out.observed_stat = band_power_statistic(stream);
  out.expected_stat = expected_p * (1.0 - expected_p);
  const double sigma = std::sqrt(out.expected_stat / static_cast<double>(out.n_gates));
  out.z_score = (out.observed_p - expected_p) / sigma;
  out.pass = std::abs(out.z_score) <= z_threshold;
  return out;
}

std::optional<std::uint64_t> samples_needed(double p_a, double p_b, double z) {
  const auto in_open_unit = [](double p) { return p > 0.0 && p < 1.0; };
  if (!in_open_unit(p_a) || !in_open_unit(p_b)) {
    throw std::invalid_argument("samples_needed: probabilities must lie in (0,1)");
  }
  if (!(z > 0.0)) throw std::invalid_argument("samples_needed: z must be > 0");
  if (p_a == p_b) return std::nullopt;

  const double gap = std::abs(p_a - p_b);
  const double spread = std::sqrt(p_a * (1.0 - p_a)) + std::sqrt(p_b * (1.0 - p_b));
  const auto separated = [&](std::uint64_t n) {
    return gap >= z * spread / std::sqrt(static_cast<double>(n));
  };
  const double estimate = std::pow(z * spread / gap, 2.0);
  if (estimate > 1e18) return std::nullopt;
  auto n = static_cast<std::uint64_t>(std::max(1.0, std::ceil(estimate)));
  while (!separated(n)) ++n;
  while (n > 1 && separated(n - 1)) --n;
  return n;
}

}  // namespace ctqkd

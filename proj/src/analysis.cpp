#include "ctqkd/analysis.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>

namespace ctqkd {

DistinguishCurve distinguishability_curve(double mu_t, double mu_c, const DetectorModel& det,
                                          double z, std::span<const std::uint64_t> n_grid,
                                          std::uint64_t trials, std::uint64_t seed) {
  det.validate();
  if (trials == 0) throw std::invalid_argument("distinguishability_curve: trials must be >= 1");
  DistinguishCurve curve;
  curve.p_thermal = click_prob_thermal(det, mu_t);
  curve.p_coherent = click_prob_coherent(det, mu_c);
  curve.single_shot_bayes_error = bayes_error(curve.p_coherent, curve.p_thermal);
  if (curve.p_thermal > 0.0 && curve.p_thermal < 1.0 && curve.p_coherent > 0.0 &&
      curve.p_coherent < 1.0) {
    curve.n_star = samples_needed(curve.p_thermal, curve.p_coherent, z);
  }

  const double mid = 0.5 * (curve.p_thermal + curve.p_coherent);
  const bool thermal_is_low = curve.p_thermal <= curve.p_coherent;
  Rng rng = derive_rng(seed, 0x5d15);
  for (const std::uint64_t n : n_grid) {
    if (n == 0) throw std::invalid_argument("distinguishability_curve: n must be >= 1");
    const auto decide_thermal = [&](std::uint64_t clicks) {
      const double freq = static_cast<double>(clicks) / static_cast<double>(n);
      if (freq == mid) return bernoulli(rng, 0.5);
      return (freq < mid) == thermal_is_low;
    };
    std::binomial_distribution<std::uint64_t> thermal_dist(n, curve.p_thermal);
    std::binomial_distribution<std::uint64_t> coherent_dist(n, curve.p_coherent);
    std::uint64_t wrong = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
      if (!decide_thermal(thermal_dist(rng))) ++wrong;
      if (decide_thermal(coherent_dist(rng))) ++wrong;
    }
    curve.points.push_back({n, static_cast<double>(wrong) / (2.0 * static_cast<double>(trials))});
  }
  return curve;
}

void SweepSpec::validate() const {
  if (values.empty()) throw std::invalid_argument("sweep grid must be nonempty");
  if (seeds_per_point < 1) throw std::invalid_argument("sweep needs at least one seed per point");
  SessionConfig cfg = base;
  AttackConfig atk = attack;
  apply_sweep_parameter(parameter, values.front(), cfg, atk);
}

namespace {

using Setter = std::function<void(double, SessionConfig&, AttackConfig&)>;

template <class T>
T& strategy_as(AttackConfig& attack, const char* name) {
  if (auto* s = std::get_if<T>(&attack.strategy)) return *s;
  throw std::invalid_argument(std::string("sweep parameter ") + name +
                              " does not apply to attack " + attack.tag());
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"n_pulses", [](double v, SessionConfig& c, AttackConfig&) {
         if (!(v >= 0.0)) throw std::invalid_argument("n_pulses must be >= 0");
         c.n_pulses = static_cast<std::uint64_t>(std::llround(v));
       }},
      {"mu_coherent", [](double v, SessionConfig& c, AttackConfig&) { c.mu_coherent = v; }},
      {"mu_thermal", [](double v, SessionConfig& c, AttackConfig&) { c.mu_thermal = v; }},
      {"transmittance",
       [](double v, SessionConfig& c, AttackConfig&) { c.channel_transmittance_oneway = v; }},
      {"tap_reflectance",
       [](double v, SessionConfig& c, AttackConfig&) { c.bob_tap_reflectance = v; }},
      {"eta_alice", [](double v, SessionConfig& c, AttackConfig&) { c.detector_alice.eta = v; }},
      {"p_d_alice", [](double v, SessionConfig& c, AttackConfig&) { c.detector_alice.p_d = v; }},
      {"eta_bob", [](double v, SessionConfig& c, AttackConfig&) { c.detector_bob.eta = v; }},
      {"p_d_bob", [](double v, SessionConfig& c, AttackConfig&) { c.detector_bob.p_d = v; }},
      {"z_threshold", [](double v, SessionConfig& c, AttackConfig&) { c.z_threshold = v; }},
      {"qber_threshold", [](double v, SessionConfig& c, AttackConfig&) { c.qber_threshold = v; }},
      {"qber_sample_fraction",
       [](double v, SessionConfig& c, AttackConfig&) { c.qber_sample_fraction = v; }},
      {"resend_mu", [](double v, SessionConfig&, AttackConfig& a) {
         if (auto* md = std::get_if<ModeDiscrimination>(&a.strategy)) {
           md->then.resend_mu = v;
         } else {
           strategy_as<InterceptResend>(a, "resend_mu").resend_mu = v;
         }
       }},
      {"tap_fraction", [](double v, SessionConfig&, AttackConfig& a) {
         strategy_as<BeamSplit>(a, "tap_fraction").tap_fraction = v;
       }},
      {"forced_click_prob", [](double v, SessionConfig&, AttackConfig& a) {
         strategy_as<BrightLight>(a, "forced_click_prob").forced_click_prob = v;
       }},
      {"probe_mu", [](double v, SessionConfig&, AttackConfig& a) {
         if (!(v >= 0.0)) throw std::invalid_argument("probe_mu must be >= 0");
         strategy_as<TrojanHorse>(a, "probe_mu").probe = Coherent{{std::sqrt(v), 0.0}};
       }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, setter] : setters()) out.push_back(name);
    return out;
  }();
  return names;
}

void apply_sweep_parameter(const std::string& name, double value, SessionConfig& cfg,
                           AttackConfig& attack) {
  const auto it = setters().find(name);
  if (it == setters().end()) throw std::invalid_argument("unknown sweep parameter: " + name);
  it->second(value, cfg, attack);
}

CurvePoint aggregate(double x, std::span<const SessionResult> results, std::uint64_t failures) {
  CurvePoint pt;
  pt.x = x;
  pt.sessions = results.size();
  pt.failures = failures;
  if (results.empty()) return pt;
  std::uint64_t alarms = 0;
  std::uint64_t qber_count = 0;
  std::uint64_t bob_count = 0;
  double key_rate = 0.0;
  for (const auto& r : results) {
    if (r.alarm != Alarm::None) ++alarms;
    if (r.qber) {
      pt.mean_qber += *r.qber;
      ++qber_count;
    }
    pt.mean_z_alice += r.alice_monitor.z_score;
    if (r.bob_monitor) {
      pt.mean_z_bob += r.bob_monitor->z_score;
      ++bob_count;
    }
    key_rate += static_cast<double>(r.counts.sifted) / static_cast<double>(r.counts.sent);
  }
  const auto n = static_cast<double>(results.size());
  pt.alarm_rate = static_cast<double>(alarms) / n;
  pt.mean_qber = qber_count ? pt.mean_qber / static_cast<double>(qber_count) : 0.0;
  pt.mean_z_alice /= n;
  pt.mean_z_bob = bob_count ? pt.mean_z_bob / static_cast<double>(bob_count) : 0.0;
  pt.key_rate = key_rate / n;
  return pt;
}

std::vector<CurvePoint> run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<CurvePoint> points;
  points.reserve(spec.values.size());
  for (const double x : spec.values) {
    std::vector<SessionResult> results;
    std::uint64_t failures = 0;
    for (std::uint64_t s = 0; s < spec.seeds_per_point; ++s) {
      try {
        SessionConfig cfg = spec.base;
        AttackConfig attack = spec.attack;
        apply_sweep_parameter(spec.parameter, x, cfg, attack);
        cfg.seed = spec.base.seed + s;
        results.push_back(run_session(cfg, attack));
      } catch (const std::exception&) {
        ++failures;
      }
    }
    points.push_back(aggregate(x, results, failures));
  }
  return points;
}

}  // namespace ctqkd

#include "ctqkd/report.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace ctqkd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Json num(double v) { return round_g6(v); }

Json detector_json(const DetectorModel& d) { return Json{{"eta", num(d.eta)}, {"p_d", num(d.p_d)}}; }

Json field_json(const LightField& f) {
  Json j{{"kind", kind_name(f)}};
  std::visit(overloaded{
                 [](const Vacuum&) {},
                 [&](const Coherent& c) {
                   j["re"] = num(c.amplitude.real());
                   j["im"] = num(c.amplitude.imag());
                 },
                 [&](const Thermal& t) { j["mean_photons"] = num(t.mean_photons); },
                 [&](const FockN& n) { j["n"] = n.n; },
                 [&](const Blinding& b) { j["forced_click_prob"] = num(b.forced_click_prob); },
             },
             f);
  return j;
}

const char* curve_header = "x,alarm_rate,mean_qber,mean_z_alice,mean_z_bob,key_rate,sessions,failures";

}  // namespace

Json to_json(const SessionConfig& cfg) {
  return Json{
      {"n_pulses", cfg.n_pulses},
      {"mu_coherent", num(cfg.mu_coherent)},
      {"mu_thermal", num(cfg.mu_thermal)},
      {"channel_transmittance_oneway", num(cfg.channel_transmittance_oneway)},
      {"bob_tap_reflectance", num(cfg.bob_tap_reflectance)},
      {"detector_alice", detector_json(cfg.detector_alice)},
      {"detector_bob", detector_json(cfg.detector_bob)},
      {"z_threshold", num(cfg.z_threshold)},
      {"qber_threshold", num(cfg.qber_threshold)},
      {"qber_sample_fraction", num(cfg.qber_sample_fraction)},
      {"seed", cfg.seed},
  };
}

Json to_json(const AttackConfig& attack) {
  Json j{{"type", attack.tag()}};
  std::visit(overloaded{
                 [](const NoAttack&) {},
                 [&](const InterceptResend& a) { j["resend_mu"] = num(a.resend_mu); },
                 [&](const BeamSplit& a) { j["tap_fraction"] = num(a.tap_fraction); },
                 [&](const ModeDiscrimination& a) { j["resend_mu"] = num(a.then.resend_mu); },
                 [&](const TrojanHorse& a) { j["probe"] = field_json(a.probe); },
                 [&](const BrightLight& a) { j["forced_click_prob"] = num(a.forced_click_prob); },
             },
             attack.strategy);
  j["eve_detector"] = detector_json(attack.eve_detector);
  return j;
}

Json to_json(const PowerTestOutcome& o) {
  return Json{
      {"observed_stat", num(o.observed_stat)},
      {"expected_stat", num(o.expected_stat)},
      {"z_score", num(o.z_score)},
      {"pass", o.pass},
      {"n_gates", o.n_gates},
  };
}

Json to_json(const EveReport& r) {
  return Json{
      {"strategy", r.strategy},
      {"learned_phase_count", r.learned_phase_count},
      {"guessed_bits_correct_fraction", num(r.guessed_bits_correct_fraction)},
      {"pairs_measured", r.pairs_measured},
      {"basis_matches", r.basis_matches},
      {"tapped_mean_photons", num(r.tapped_mean_photons)},
      {"notes", r.notes},
  };
}

Json to_json(const SessionResult& r) {
  Json j;
  j["schema"] = "ctqkd.session/1";
  j["config"] = to_json(r.config);
  j["attack"] = r.attack_tag;
  j["counts"] = Json{{"sent", r.counts.sent},
                     {"clicked", r.counts.clicked},
                     {"sifted", r.counts.sifted},
                     {"disclosed", r.counts.disclosed},
                     {"double_clicks", r.counts.double_clicks}};
  j["qber"] = r.qber ? num(*r.qber) : Json(nullptr);
  j["full_key_error_rate"] = num(r.full_key_error_rate);
  j["key_length"] = r.sifted_key_alice.size();
  j["key_error"] = r.key_error;
  j["alice_monitor"] = to_json(r.alice_monitor);
  j["bob_monitor"] = r.bob_monitor ? to_json(*r.bob_monitor) : Json(nullptr);
  j["alarm"] = to_string(r.alarm);
  j["eve"] = to_json(r.eve);
  return j;
}

std::string session_json(const SessionResult& result) { return to_json(result).dump(2) + "\n"; }

std::string session_csv_header() {
  return "seed,attack,n_pulses,sifted,qber,z_alice,z_bob,alarm";
}

std::string session_csv_row(const SessionResult& r) {
  return std::to_string(r.config.seed) + "," + r.attack_tag + "," +
         std::to_string(r.counts.sent) + "," + std::to_string(r.counts.sifted) + "," +
         (r.qber ? format_g6(*r.qber) : std::string()) + "," +
         format_g6(r.alice_monitor.z_score) + "," +
         (r.bob_monitor ? format_g6(r.bob_monitor->z_score) : std::string()) + "," +
         to_string(r.alarm);
}

std::string export_report(std::span<const CurvePoint> points, ReportFormat format) {
  if (points.empty()) throw std::invalid_argument("export_report: no curve points");
  if (format == ReportFormat::Csv) {
    std::string out = std::string(curve_header) + "\n";
    for (const auto& p : points) {
      out += format_g6(p.x) + "," + format_g6(p.alarm_rate) + "," + format_g6(p.mean_qber) + "," +
             format_g6(p.mean_z_alice) + "," + format_g6(p.mean_z_bob) + "," +
             format_g6(p.key_rate) + "," + std::to_string(p.sessions) + "," +
             std::to_string(p.failures) + "\n";
    }
    return out;
  }
  Json arr = Json::array();
  for (const auto& p : points) {
    arr.push_back(Json{{"x", num(p.x)},
                       {"alarm_rate", num(p.alarm_rate)},
                       {"mean_qber", num(p.mean_qber)},
                       {"mean_z_alice", num(p.mean_z_alice)},
                       {"mean_z_bob", num(p.mean_z_bob)},
                       {"key_rate", num(p.key_rate)},
                       {"sessions", p.sessions},
                       {"failures", p.failures}});
  }
  return Json{{"schema", "ctqkd.sweep/1"}, {"points", arr}}.dump(2) + "\n";
}

std::string export_report(std::span<const SessionResult> results, ReportFormat format) {
  if (results.empty()) throw std::invalid_argument("export_report: no session results");
  if (format == ReportFormat::Csv) {
    std::string out = session_csv_header() + "\n";
    for (const auto& r : results) out += session_csv_row(r) + "\n";
    return out;
  }
  Json arr = Json::array();
  for (const auto& r : results) arr.push_back(to_json(r));
  return Json{{"schema", "ctqkd.sessions/1"}, {"sessions", arr}}.dump(2) + "\n";
}

std::vector<CurvePoint> curve_points_from_json(const std::string& text) {
  const Json doc = Json::parse(text);
  if (doc.value("schema", "") != "ctqkd.sweep/1") {
    throw std::invalid_argument("not a ctqkd.sweep/1 document");
  }
  std::vector<CurvePoint> points;
  for (const auto& j : doc.at("points")) {
    CurvePoint p;
    p.x = j.at("x").get<double>();
    p.alarm_rate = j.at("alarm_rate").get<double>();
    p.mean_qber = j.at("mean_qber").get<double>();
    p.mean_z_alice = j.at("mean_z_alice").get<double>();
    p.mean_z_bob = j.at("mean_z_bob").get<double>();
    p.key_rate = j.at("key_rate").get<double>();
    p.sessions = j.at("sessions").get<std::uint64_t>();
    p.failures = j.at("failures").get<std::uint64_t>();
    points.push_back(p);
  }
  return points;
}

std::string distinguish_csv(const DistinguishCurve& curve) {
  std::string out = "n,discrimination_error\n";
  for (const auto& p : curve.points) {
    out += std::to_string(p.n) + "," + format_g6(p.discrimination_error) + "\n";
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string output_file_name(const std::string& command, std::uint64_t seed,
                             const std::string& ext) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);
  return command + "_" + stamp + "_" + std::to_string(seed) + "." + ext;
}

}  // namespace ctqkd

#include "ctqkd/light_field.hpp"

#include <cmath>
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
}  // namespace

void validate(const LightField& field) {
  std::visit(overloaded{
                 [](const Vacuum&) {},
                 [](const Coherent& c) {
                   if (!std::isfinite(c.amplitude.real()) || !std::isfinite(c.amplitude.imag())) {
                     throw std::invalid_argument("coherent amplitude must be finite");
                   }
                 },
                 [](const Thermal& t) {
                   if (!(t.mean_photons >= 0.0) || !std::isfinite(t.mean_photons)) {
                     throw std::invalid_argument("thermal mean_photons must be >= 0");
                   }
                 },
                 [](const FockN& f) {
                   if (f.n < 0) throw std::invalid_argument("Fock n must be >= 0");
                 },
                 [](const Blinding& b) {
                   if (!(b.forced_click_prob >= 0.0 && b.forced_click_prob <= 1.0)) {
                     throw std::invalid_argument("forced_click_prob must lie in [0,1]");
                   }
                 },
             },
             field);
}

std::string kind_name(const LightField& field) {
  return std::visit(overloaded{
                        [](const Vacuum&) { return std::string("vacuum"); },
                        [](const Coherent&) { return std::string("coherent"); },
                        [](const Thermal&) { return std::string("thermal"); },
                        [](const FockN&) { return std::string("fock"); },
                        [](const Blinding&) { return std::string("blinding"); },
                    },
                    field);
}

double mean_photons(const LightField& field) {
  return std::visit(overloaded{
                        [](const Vacuum&) { return 0.0; },
                        [](const Coherent& c) { return std::norm(c.amplitude); },
                        [](const Thermal& t) { return t.mean_photons; },
                        [](const FockN& f) { return static_cast<double>(f.n); },
                        [](const Blinding&) { return std::numeric_limits<double>::infinity(); },
                    },
                    field);
}

double no_click_factor(const LightField& field, double eta, double t) {
  const double eff = eta * t;
  return std::visit(overloaded{
                        [](const Vacuum&) { return 1.0; },
                        [&](const Coherent& c) { return std::exp(-eff * std::norm(c.amplitude)); },
                        [&](const Thermal& th) { return 1.0 / (1.0 + eff * th.mean_photons); },
                        [&](const FockN& f) { return std::pow(1.0 - eff, f.n); },
                        [](const Blinding& b) { return 1.0 - b.forced_click_prob; },
                    },
                    field);
}

double click_probability(std::span<const LightField> fields, const DetectorModel& det, double t) {
  double no_click = 1.0 - det.p_d;
  for (const auto& f : fields) no_click *= no_click_factor(f, det.eta, t);
  return 1.0 - no_click;
}

double click_probability(const LightField& field, const DetectorModel& det, double t) {
  return click_probability(std::span<const LightField>(&field, 1), det, t);
}

LightField propagate_field(const LightField& field, double transmittance, Rng& rng) {
  if (!(transmittance >= 0.0 && transmittance <= 1.0)) {
    throw std::invalid_argument("propagate: transmittance must lie in [0,1]");
  }
  return std::visit(overloaded{
                        [](const Vacuum& v) -> LightField { return v; },
                        [&](const Coherent& c) -> LightField {
                          return Coherent{c.amplitude * std::sqrt(transmittance)};
                        },
                        [&](const Thermal& th) -> LightField {
                          return Thermal{th.mean_photons * transmittance};
                        },
                        [&](const FockN& f) -> LightField {
                          int kept = 0;
                          for (int i = 0; i < f.n; ++i) kept += bernoulli(rng, transmittance) ? 1 : 0;
                          return FockN{kept};
                        },
                        [](const Blinding& b) -> LightField { return b; },
                    },
                    field);
}

LightField phase_modulate(const LightField& field, double phi) {
  if (const auto* c = std::get_if<Coherent>(&field)) {
    return Coherent{c->amplitude * std::polar(1.0, phi)};
  }
  return field;
}

DensityMatrix to_density_matrix(const LightField& field, const TruncationConfig& trunc) {
  return std::visit(overloaded{
                        [&](const Vacuum&) { return vacuum_state(trunc); },
                        [&](const Coherent& c) { return coherent_state(c.amplitude, trunc); },
                        [&](const Thermal& th) { return thermal_state(th.mean_photons, trunc); },
                        [&](const FockN& f) { return fock_state(f.n, trunc); },
                        [](const Blinding&) -> DensityMatrix {
                          throw std::invalid_argument("blinding light has no Fock representation");
                        },
                    },
                    field);
}

}  // namespace ctqkd

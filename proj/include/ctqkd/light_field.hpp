#pragma once

#include <complex>
#include <span>
#include <string>
#include <variant>

#include "ctqkd/detector.hpp"
#include "ctqkd/fock.hpp"
#include "ctqkd/rng.hpp"

namespace ctqkd {

// Semiclassical per-mode pulse content. The exact DensityMatrix path in
// fock.hpp is used to cross-check the click statistics of these fields.

struct Vacuum {
  friend bool operator==(const Vacuum&, const Vacuum&) = default;
};
struct Coherent {
  std::complex<double> amplitude;
  friend bool operator==(const Coherent&, const Coherent&) = default;
};
struct Thermal {
  double mean_photons = 0.0;
  friend bool operator==(const Thermal&, const Thermal&) = default;
};
struct FockN {
  int n = 0;
  friend bool operator==(const FockN&, const FockN&) = default;
};
/// Bright light that drives a detector into forced clicking.
struct Blinding {
  double forced_click_prob = 1.0;
  friend bool operator==(const Blinding&, const Blinding&) = default;
};

using LightField = std::variant<Vacuum, Coherent, Thermal, FockN, Blinding>;

void validate(const LightField& field);
std::string kind_name(const LightField& field);

inline bool is_coherent(const LightField& f) { return std::holds_alternative<Coherent>(f); }
inline bool is_thermal(const LightField& f) { return std::holds_alternative<Thermal>(f); }

/// Mean photon number; +inf for Blinding.
double mean_photons(const LightField& field);

/// Probability that the field produces no photo-detection on a detector of
/// efficiency `eta` placed behind an extra transmittance `t`. Dark counts are
/// not included.
double no_click_factor(const LightField& field, double eta, double t = 1.0);

/// Click probability of one detector illuminated by independent fields:
/// 1 - (1-p_d) Π no_click_factor.
double click_probability(std::span<const LightField> fields, const DetectorModel& det,
                         double t = 1.0);
double click_probability(const LightField& field, const DetectorModel& det, double t = 1.0);

/// Loss: Coherent amplitude × √T, Thermal mean × T, FockN binomially thinned,
/// Blinding and Vacuum unchanged.
LightField propagate_field(const LightField& field, double transmittance, Rng& rng);

/// Phase modulation: only a Coherent amplitude picks up e^{iφ}.
LightField phase_modulate(const LightField& field, double phi);

/// Exact density matrix for the non-blinding alternatives.
DensityMatrix to_density_matrix(const LightField& field, const TruncationConfig& trunc = {});

}  // namespace ctqkd

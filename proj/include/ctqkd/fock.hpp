#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ctqkd {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Raised when a state's probability mass beyond n_max exceeds tol_trace.
class CutoffTooSmall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TruncationConfig {
  int n_max = 40;
  double tol_trace = 1e-10;

  int dim() const { return n_max + 1; }
  void validate() const;
};

/// Truncated Fock-basis density operator. Immutable once built; every
/// factory checks Hermiticity, unit trace and positivity.
class DensityMatrix {
 public:
  /// Adopts `m` after checking it is a density operator (Hermitian within
  /// 1e-12, trace 1 within 1e-9, min eigenvalue >= -1e-10).
  static DensityMatrix from_matrix(ComplexMatrix m);

  int dim() const { return static_cast<int>(m_.rows()); }
  int n_max() const { return dim() - 1; }
  Complex operator()(int n, int m) const { return m_(n, m); }
  const ComplexMatrix& matrix() const { return m_; }

  double trace() const { return m_.trace().real(); }
  double purity() const;
  double mean_photon_number() const;
  bool is_diagonal() const;

  /// Row-major text dump, one row per line, cells "re+imi" separated by a
  /// single space. Used by golden-file tests.
  std::string to_text(int precision = 12) const;

 private:
  explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {}
  friend DensityMatrix make_unchecked(ComplexMatrix m);

  ComplexMatrix m_;
};

DensityMatrix coherent_state(Complex alpha, const TruncationConfig& trunc = {});
DensityMatrix thermal_state(double mu_t, const TruncationConfig& trunc = {});
DensityMatrix fock_state(int n, const TruncationConfig& trunc = {});
inline DensityMatrix vacuum_state(const TruncationConfig& trunc = {}) {
  return fock_state(0, trunc);
}

/// ρ(n,m) -> ρ(n,m) e^{iφ(n-m)}.
DensityMatrix phase_shift(const DensityMatrix& rho, double phi);

/// Pure-loss channel (beam splitter with vacuum ancilla), transmittance T.
DensityMatrix attenuate(const DensityMatrix& rho, double transmittance);

double trace_distance(const DensityMatrix& rho1, const DensityMatrix& rho2);

/// Closed form ⟨α|ρ_t|α⟩ = exp(-|α|²/(1+μ_t)) / (1+μ_t).
double overlap_coherent_thermal(Complex alpha, double mu_t);

/// Re tr(ρσ).
double expectation(const DensityMatrix& rho, const DensityMatrix& sigma);

double min_eigenvalue(const DensityMatrix& rho);

inline double vacuum_probability(const DensityMatrix& rho) {
  return rho(0, 0).real();
}

}  // namespace ctqkd

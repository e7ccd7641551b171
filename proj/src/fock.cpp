#include "ctqkd/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

namespace ctqkd {

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-9;
constexpr double kPsdTol = 1e-10;

void require_same_dim(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("density matrices differ in dimension: " +
                                std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()));
  }
}

void check_tail(double kept, const TruncationConfig& trunc, const char* what) {
  const double tail = 1.0 - kept;
  if (tail > trunc.tol_trace) {
    std::ostringstream msg;
    msg << what << ": truncation loss " << tail << " exceeds tol_trace "
        << trunc.tol_trace << " at n_max=" << trunc.n_max;
    throw CutoffTooSmall(msg.str());
  }
}

Eigen::VectorXd hermitian_eigenvalues(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigenvalue decomposition did not converge");
  }
  return solver.eigenvalues();
}

}  // namespace

DensityMatrix make_unchecked(ComplexMatrix m) { return DensityMatrix(std::move(m)); }

void TruncationConfig::validate() const {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  if (!(tol_trace >= 0.0)) throw std::invalid_argument("tol_trace must be >= 0");
}

DensityMatrix DensityMatrix::from_matrix(ComplexMatrix m) {
  if (m.rows() != m.cols() || m.rows() < 2) {
    throw std::invalid_argument("density matrix must be square with dim >= 2");
  }
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol) {
    throw std::invalid_argument("density matrix is not Hermitian");
  }
  if (std::abs(m.trace().real() - 1.0) > kTraceTol) {
    throw std::invalid_argument("density matrix trace is not 1");
  }
  if (hermitian_eigenvalues(m).minCoeff() < -kPsdTol) {
    throw std::invalid_argument("density matrix is not positive semidefinite");
  }
  return DensityMatrix(std::move(m));
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

double DensityMatrix::mean_photon_number() const {
  double mean = 0.0;
  for (int n = 1; n < dim(); ++n) mean += n * m_(n, n).real();
  return mean;
}

bool DensityMatrix::is_diagonal() const {
  for (int n = 0; n < dim(); ++n) {
    for (int m = 0; m < dim(); ++m) {
      if (n != m && m_(n, m) != Complex(0.0, 0.0)) return false;
    }
  }
  return true;
}

std::string DensityMatrix::to_text(int precision) const {
  std::string out;
  char cell[96];
  for (int n = 0; n < dim(); ++n) {
    for (int m = 0; m < dim(); ++m) {
      // Normalize -0 so dumps are stable.
      const double re = m_(n, m).real() + 0.0;
      const double im = m_(n, m).imag() + 0.0;
      std::snprintf(cell, sizeof cell, "%.*g%+.*gi", precision, re, precision, im);
      if (m > 0) out += ' ';
      out += cell;
    }
    out += '\n';
  }
  return out;
}

DensityMatrix coherent_state(Complex alpha, const TruncationConfig& trunc) {
  trunc.validate();
  const double mean = std::norm(alpha);
  if (mean > trunc.n_max / 4.0) {
    throw CutoffTooSmall("coherent_state: |alpha|^2 = " + std::to_string(mean) +
                         " exceeds n_max/4 for n_max=" + std::to_string(trunc.n_max));
  }
  Eigen::VectorXcd amp(trunc.dim());
  amp(0) = std::exp(-mean / 2.0);
  for (int n = 1; n < trunc.dim(); ++n) {
    amp(n) = amp(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  }
  const double kept = amp.squaredNorm();
  check_tail(kept, trunc, "coherent_state");
  amp /= std::sqrt(kept);
  return make_unchecked(amp * amp.adjoint());
}

DensityMatrix thermal_state(double mu_t, const TruncationConfig& trunc) {
  trunc.validate();
  if (!(mu_t >= 0.0) || !std::isfinite(mu_t)) {
    throw std::invalid_argument("thermal_state: mean photon number must be >= 0");
  }
  ComplexMatrix m = ComplexMatrix::Zero(trunc.dim(), trunc.dim());
  const double ratio = mu_t / (1.0 + mu_t);
  double p = 1.0 / (1.0 + mu_t);
  double kept = 0.0;
  for (int n = 0; n < trunc.dim(); ++n) {
    m(n, n) = p;
    kept += p;
    p *= ratio;
  }
  check_tail(kept, trunc, "thermal_state");
  m /= kept;
  return make_unchecked(std::move(m));
}

DensityMatrix fock_state(int n, const TruncationConfig& trunc) {
  trunc.validate();
  if (n < 0) throw std::invalid_argument("fock_state: n must be >= 0");
  if (n > trunc.n_max) {
    throw CutoffTooSmall("fock_state: n=" + std::to_string(n) + " beyond n_max");
  }
  ComplexMatrix m = ComplexMatrix::Zero(trunc.dim(), trunc.dim());
  m(n, n) = 1.0;
  return make_unchecked(std::move(m));
}

DensityMatrix phase_shift(const DensityMatrix& rho, double phi) {
  if (!std::isfinite(phi)) throw std::invalid_argument("phase_shift: phi must be finite");
  ComplexMatrix m = rho.matrix();
  for (int n = 0; n < rho.dim(); ++n) {
    for (int k = 0; k < rho.dim(); ++k) {
      if (n != k) m(n, k) *= std::polar(1.0, phi * (n - k));
    }
  }
  return make_unchecked(std::move(m));
}

DensityMatrix attenuate(const DensityMatrix& rho, double transmittance) {
  if (!(transmittance >= 0.0 && transmittance <= 1.0)) {
    throw std::invalid_argument("attenuate: transmittance must lie in [0,1]");
  }
  const int dim = rho.dim();
  // Pascal's triangle; C(60,30) ~ 1e17 is exact enough in double.
  std::vector<std::vector<double>> binom(dim, std::vector<double>(dim, 0.0));
  for (int n = 0; n < dim; ++n) {
    binom[n][0] = 1.0;
    for (int k = 1; k <= n; ++k) binom[n][k] = binom[n - 1][k - 1] + (k < n ? binom[n - 1][k] : 0.0);
  }
  const double amp_t = std::sqrt(transmittance);
  const double loss = 1.0 - transmittance;

  // Kraus operators A_k|n> = sqrt(C(n,k)) t^{(n-k)/2} (1-t)^{k/2} |n-k>.
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) {
    for (int m = 0; m < dim; ++m) {
      const Complex entry = rho(n, m);
      if (entry == Complex(0.0, 0.0)) continue;
      for (int k = 0; k <= std::min(n, m); ++k) {
        const double coef = std::sqrt(binom[n][k] * binom[m][k]) *
                            std::pow(amp_t, n - k) * std::pow(amp_t, m - k) *
                            std::pow(loss, k);
        out(n - k, m - k) += coef * entry;
      }
    }
  }
  return make_unchecked(std::move(out));
}

double trace_distance(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  require_same_dim(rho1, rho2);
  const ComplexMatrix diff = rho1.matrix() - rho2.matrix();
  const double d = 0.5 * hermitian_eigenvalues(diff).cwiseAbs().sum();
  return std::clamp(d, 0.0, 1.0);
}

double overlap_coherent_thermal(Complex alpha, double mu_t) {
  if (!(mu_t >= 0.0)) throw std::invalid_argument("overlap: mu_t must be >= 0");
  return std::exp(-std::norm(alpha) / (1.0 + mu_t)) / (1.0 + mu_t);
}

double expectation(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_dim(rho, sigma);
  // tr(ρσ) = Σ_{nm} ρ(n,m) σ(m,n)
  const Complex value = rho.matrix().cwiseProduct(sigma.matrix().transpose()).sum();
  return value.real();
}

double min_eigenvalue(const DensityMatrix& rho) {
  if (rho.is_diagonal()) {
    return rho.matrix().diagonal().real().minCoeff();
  }
  return hermitian_eigenvalues(rho.matrix()).minCoeff();
}

}  // namespace ctqkd

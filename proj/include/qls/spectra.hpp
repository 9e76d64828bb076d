#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qls/config.hpp"
#include "qls/linalg.hpp"
#include "qls/model.hpp"

namespace qls {

/// Eigenvalues sorted by (Re, Im), unit-norm phase-fixed eigenvectors and
/// per-pair residuals |M v - eps v|.
struct ComplexSpectrum {
  VectorXcd eigenvalues;
  MatrixXcd eigenvectors;
  VectorXd residuals;
  double matrix_norm = 0.0;  // max column sum of |M|

  Eigen::Index size() const { return eigenvalues.size(); }
  double max_residual() const { return residuals.size() ? residuals.maxCoeff() : 0.0; }
  /// Number of pairs above the 1e-8 |M| acceptance level (reported, not rejected).
  Eigen::Index defective_count(double rel_tol = 1e-8) const {
    return (residuals.array() > rel_tol * std::max(matrix_norm, 1.0)).count();
  }
};

inline ComplexSpectrum eigensolve_dense(const MatrixXcd& m) {
  auto eig = linalg::eig_general(m);
  for (Eigen::Index j = 0; j < eig.vectors.cols(); ++j) {
    eig.vectors.col(j).normalize();
    linalg::fix_phase(eig.vectors.col(j));
  }
  const auto order = linalg::sorted_order(eig.values, eig.vectors);
  ComplexSpectrum out;
  const auto n = m.rows();
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.eigenvalues(j) = eig.values(order[static_cast<std::size_t>(j)]);
    out.eigenvectors.col(j) = eig.vectors.col(order[static_cast<std::size_t>(j)]);
  }
  out.matrix_norm = n ? m.cwiseAbs().colwise().sum().maxCoeff() : 0.0;
  const MatrixXcd r = m * out.eigenvectors - out.eigenvectors * out.eigenvalues.asDiagonal();
  out.residuals = r.colwise().norm().transpose();
  return out;
}

inline ComplexSpectrum single_particle_spectrum(const ArrayConfig& cfg) {
  return eigensolve_dense(build_single_hamiltonian(cfg));
}

/// A two-excitation eigenstate: energy eps (pair eigenvalue 2 eps) and the
/// symmetric amplitude matrix psi with sum |psi_mn|^2 = 1.
struct TwoExcState {
  cplx energy;
  MatrixXcd psi;
  double residual = 0.0;  // of the pair-basis eigenpair
};

/// Symmetric N x N amplitude from pair-basis coefficients: off-diagonal
/// coefficients are split as c/sqrt(2) onto (m,n) and (n,m).
inline MatrixXcd unfold_pair_vector(const PairBasis& basis, const VectorXcd& coeffs) {
  const int n = basis.n_sites();
  MatrixXcd psi = MatrixXcd::Zero(n, n);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto [m, k] = basis[i];
    const cplx c = coeffs(static_cast<Eigen::Index>(i));
    if (m == k) {
      psi(m - 1, m - 1) = c;
    } else {
      psi(m - 1, k - 1) = c / std::numbers::sqrt2;
      psi(k - 1, m - 1) = c / std::numbers::sqrt2;
    }
  }
  return psi;
}

/// Inverse of unfold_pair_vector on symmetric matrices.
inline VectorXcd fold_pair_vector(const PairBasis& basis, const MatrixXcd& psi) {
  VectorXcd c(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto [m, k] = basis[i];
    c(static_cast<Eigen::Index>(i)) =
        m == k ? psi(m - 1, m - 1) : std::numbers::sqrt2 * psi(m - 1, k - 1);
  }
  return c;
}

struct TwoExcitationSpectrum {
  PairBasis basis;
  ComplexSpectrum pair_spectrum;  // eigenvalues are 2 eps
  std::vector<TwoExcState> states;
};

inline TwoExcitationSpectrum two_excitation_spectrum(const ArrayConfig& cfg) {
  cfg.validate(2);
  PairBasis basis(cfg.n_qubits, pair_mode_for(cfg.chi));
  auto spec = eigensolve_dense(build_two_excitation_hamiltonian(cfg, basis));
  std::vector<TwoExcState> states;
  states.reserve(static_cast<std::size_t>(spec.size()));
  for (Eigen::Index j = 0; j < spec.size(); ++j) {
    MatrixXcd psi = unfold_pair_vector(basis, spec.eigenvectors.col(j));
    psi /= psi.norm();
    states.push_back({spec.eigenvalues(j) / 2.0, std::move(psi), spec.residuals(j)});
  }
  return {std::move(basis), std::move(spec), std::move(states)};
}

/// Mean energies (eps_n + eps_m)/2 of all unordered single-particle pairs
/// n <= m (the chi = 0 reference spectrum), sorted by (Re, Im).
inline std::vector<cplx> noninteracting_pair_spectrum(const ArrayConfig& cfg) {
  cfg.validate(2);
  const auto single = single_particle_spectrum(cfg);
  std::vector<cplx> out;
  const auto n = single.size();
  out.reserve(static_cast<std::size_t>(n * (n + 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      out.push_back(0.5 * (single.eigenvalues(i) + single.eigenvalues(j)));
    }
  }
  std::sort(out.begin(), out.end(), linalg::complex_less);
  return out;
}

// ---------------------------------------------------------------------------
// Polariton dispersion

/// eps(k) = gamma0 sin(phi) / (cos k - cos phi) of the infinite array.
inline double exact_dispersion(double k, double phase, double gamma0 = 1.0) {
  if (phase == 0.0) throw SingularityError("dispersion is undefined at phase 0");
  const double denom = std::cos(k) - std::cos(phase);
  if (std::abs(denom) < 1e-12) throw SingularityError("k lies on the light line (cos k = cos phi)");
  return gamma0 * std::sin(phase) / denom;
}

/// Lower-branch approximation eps(k) = -2 phi gamma0 / k^2, valid for phi << k << 1.
inline double approx_dispersion(double k, double phase, double gamma0 = 1.0) {
  if (!(phase > 0.0)) throw ConfigError("approximate dispersion needs phase > 0");
  if (k == 0.0) throw SingularityError("approximate dispersion diverges at k = 0");
  return -2.0 * phase * gamma0 / (k * k);
}

/// Wave number on the approximate lower branch for a given eps < 0.
inline double approx_wave_number(double eps, double phase, double gamma0 = 1.0) {
  if (!(eps < 0.0)) throw ConfigError("lower branch requires eps < 0");
  if (!(phase > 0.0)) throw ConfigError("approximate dispersion needs phase > 0");
  return std::sqrt(2.0 * phase * gamma0 / -eps);
}

/// Average pair energy eps(kx, ky) = -phi gamma0 (1/kx^2 + 1/ky^2).
inline double pair_dispersion(double kx, double ky, double phase, double gamma0 = 1.0) {
  return -phase * gamma0 * (1.0 / (kx * kx) + 1.0 / (ky * ky));
}

enum class Axis { X, Y };

struct IsoenergyPoint {
  double kx;
  double ky;
  Axis group_velocity;  // axis of the dominant |d eps / dk| component
};

/// Smallest single-axis wave number on the contour (other axis -> infinity).
inline double isoenergy_asymptote(double eps, double phase, double gamma0 = 1.0) {
  if (!(eps < 0.0)) throw ConfigError("isoenergy contour requires eps < 0");
  return std::sqrt(phase * gamma0 / -eps);
}

/// Grid points of (0, k_max]^2 lying on the pair-isoenergy contour: of each
/// grid edge crossed by the contour, the endpoint closer to it.
inline std::vector<IsoenergyPoint> isoenergy_contour(double eps, double phase, double k_max,
                                                     int resolution, double gamma0 = 1.0) {
  if (!(eps < 0.0)) throw ConfigError("isoenergy contour requires eps < 0");
  if (!(phase > 0.0)) throw ConfigError("isoenergy contour needs phase > 0");
  if (resolution < 1 || !(k_max > 0.0)) throw ConfigError("invalid k grid");
  const double h = k_max / resolution;
  auto miss = [&](int i, int j) { return pair_dispersion(i * h, j * h, phase, gamma0) - eps; };
  std::vector<IsoenergyPoint> out;
  for (int i = 1; i <= resolution; ++i) {
    for (int j = 1; j <= resolution; ++j) {
      const double f = miss(i, j);
      bool on = false;
      for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const int a = i + di, b = j + dj;
        if (a < 1 || b < 1 || a > resolution || b > resolution) continue;
        const double g = miss(a, b);
        if ((f < 0.0) != (g < 0.0) && std::abs(f) <= std::abs(g)) on = true;
      }
      if (!on) continue;
      const double kx = i * h, ky = j * h;
      const double gx = 2.0 * phase * gamma0 / (kx * kx * kx);
      const double gy = 2.0 * phase * gamma0 / (ky * ky * ky);
      out.push_back({kx, ky, gx >= gy ? Axis::X : Axis::Y});
    }
  }
  return out;
}

}  // namespace qls

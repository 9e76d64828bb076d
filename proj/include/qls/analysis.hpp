#pragma once

// Shape analysis of two-excitation states: Schmidt (SVD) structure,
// real/reciprocal-space participation ratios, the cross-state classifier,
// Fourier maps and the (phase, interaction) sweep.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>
#include <thread>
#include <vector>

#include "qls/config.hpp"
#include "qls/linalg.hpp"
#include "qls/model.hpp"
#include "qls/spectra.hpp"

namespace qls {

/// Sum |v_x|^4 of the normalized vector.
template <class Vec>
double ipr_real(const Vec& v) {
  const double n2 = v.squaredNorm();
  if (n2 == 0.0) return 0.0;
  return v.cwiseAbs2().cwiseAbs2().sum() / (n2 * n2);
}

/// IPR of the expansion over the standing waves of the discrete second derivative.
inline double ipr_reciprocal(const VectorXcd& v, const StandingWaves& waves) {
  const VectorXcd coeffs = waves.modes.transpose().cast<cplx>() * v;
  return ipr_real(coeffs);
}

inline double ipr_reciprocal(const VectorXcd& v) {
  return ipr_reciprocal(v, standing_waves(static_cast<int>(v.size())));
}

/// Rank-2 Schmidt structure psi ~ a b^T + b a^T.
struct SchmidtData {
  VectorXd singular_values;  // descending, sum s^2 = 1 for normalized psi
  VectorXcd psi_loc;         // unit vectors spanning the leading two singular directions
  VectorXcd psi_free;
  bool indeterminate = false;
};

namespace detail {

/// Split the 2x2 complex symmetric form m into linear factors:
/// m = alpha beta^T + beta alpha^T.
inline std::pair<Eigen::Vector2cd, Eigen::Vector2cd> factor_symmetric_form(const Eigen::Matrix2cd& m) {
  const cplx a = m(0, 0), b = m(0, 1), c = m(1, 1);
  const double lead = std::max(std::abs(a), std::abs(c));
  if (lead <= 1e-14 * std::abs(b)) {
    return {Eigen::Vector2cd(b, 0.0), Eigen::Vector2cd(0.0, 1.0)};
  }
  // Roots of p r^2 + 2 b r + q = 0 with p the larger diagonal entry.
  const bool first = std::abs(a) >= std::abs(c);
  const cplx p = first ? a : c;
  const cplx q = first ? c : a;
  cplx disc = std::sqrt(b * b - p * q);
  if (std::real(std::conj(b) * disc) < 0.0) disc = -disc;
  const cplx s = -(b + disc);
  const cplx r1 = s / p;
  const cplx r2 = s == cplx(0.0) ? cplx(0.0) : q / s;
  if (first) return {Eigen::Vector2cd(p / 2.0, -r1 * p / 2.0), Eigen::Vector2cd(1.0, -r2)};
  return {Eigen::Vector2cd(-r1 * p / 2.0, p / 2.0), Eigen::Vector2cd(-r2, 1.0)};
}

}  // namespace detail

/// SVD of psi; the leading two-dimensional singular subspace is resolved
/// into the pair (a, b) with psi_2 = a b^T + b a^T, and the factor with the
/// larger real-space IPR becomes psi_loc.
inline SchmidtData schmidt_decompose(const MatrixXcd& psi, double degeneracy_tol = 1e-6) {
  if (psi.rows() != psi.cols() || psi.rows() < 2) throw ConfigError("psi must be square, N >= 2");
  Eigen::BDCSVD<MatrixXcd> svd(psi, Eigen::ComputeThinU);
  SchmidtData out;
  out.singular_values = svd.singularValues();
  const MatrixXcd u2 = svd.matrixU().leftCols(2);

  const auto& s = out.singular_values;
  if (s.size() >= 3 && s(0) - s(2) < degeneracy_tol) out.indeterminate = true;

  const Eigen::Matrix2cd form = u2.adjoint() * psi * u2.conjugate();
  const auto [alpha, beta] = detail::factor_symmetric_form(form);
  VectorXcd a = u2 * alpha;
  VectorXcd b = u2 * beta;
  a.normalize();
  b.normalize();
  if (ipr_real(a) < ipr_real(b)) std::swap(a, b);
  linalg::fix_phase(a);
  linalg::fix_phase(b);
  out.psi_loc = std::move(a);
  out.psi_free = std::move(b);
  return out;
}

struct Thresholds {
  double ipr_min = 0.12;
  double sv_max = 0.25;
};

enum class ClassStatus {
  Ok,
  DegenerateSchmidt,  // s1 ~ s2 ~ s3
  DegenerateEnergy,   // eigenvalue shared with another state; eigenvector not unique
  LargeResidual,      // eigenpair residual above the classification cutoff
};

inline const char* to_string(ClassStatus s) {
  switch (s) {
    case ClassStatus::Ok: return "ok";
    case ClassStatus::DegenerateSchmidt: return "degenerate-schmidt";
    case ClassStatus::DegenerateEnergy: return "degenerate-energy";
    case ClassStatus::LargeResidual: return "large-residual";
  }
  return "?";
}

struct Classification {
  VectorXd singular_values;
  VectorXcd psi_loc;
  VectorXcd psi_free;
  double ipr_loc_real = 0.0;
  double ipr_free_recip = 0.0;
  double residual_weight = 0.0;  // max(s3, s4, ...)
  bool is_cross = false;
  ClassStatus status = ClassStatus::Ok;
};

inline Classification classify_state(const TwoExcState& state, const Thresholds& th = {},
                                     const StandingWaves* waves = nullptr) {
  auto schmidt = schmidt_decompose(state.psi);
  Classification c;
  c.singular_values = std::move(schmidt.singular_values);
  c.psi_loc = std::move(schmidt.psi_loc);
  c.psi_free = std::move(schmidt.psi_free);
  c.ipr_loc_real = ipr_real(c.psi_loc);
  c.ipr_free_recip = waves ? ipr_reciprocal(c.psi_free, *waves) : ipr_reciprocal(c.psi_free);
  c.residual_weight = c.singular_values.size() > 2 ? c.singular_values.tail(c.singular_values.size() - 2).maxCoeff() : 0.0;
  if (schmidt.indeterminate) {
    c.status = ClassStatus::DegenerateSchmidt;
    return c;
  }
  c.is_cross = c.ipr_loc_real > th.ipr_min && c.ipr_free_recip > th.ipr_min &&
               c.residual_weight < th.sv_max;
  return c;
}

/// Indices of eigenvalues that coincide with another one to within tol.
inline std::vector<bool> degenerate_mask(const VectorXcd& values, double tol) {
  std::vector<bool> mask(static_cast<std::size_t>(values.size()), false);
  // values are sorted by real part; compare within a real-part window
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    for (Eigen::Index j = i + 1; j < values.size() && values(j).real() - values(i).real() <= tol; ++j) {
      if (std::abs(values(j) - values(i)) <= tol) {
        mask[static_cast<std::size_t>(i)] = true;
        mask[static_cast<std::size_t>(j)] = true;
      }
    }
  }
  return mask;
}

struct SpectrumClassification {
  std::vector<Classification> states;
  std::size_t cross_count = 0;
  double cross_fraction() const {
    return states.empty() ? 0.0 : static_cast<double>(cross_count) / static_cast<double>(states.size());
  }
};

/// Classify every state of a two-excitation spectrum. States with pair
/// residual above residual_cutoff, or whose eigenvalue is degenerate (so the
/// eigenvector is arbitrary within its eigenspace), are never cross.
inline SpectrumClassification classify_spectrum(const TwoExcitationSpectrum& spec,
                                                const Thresholds& th = {},
                                                double residual_cutoff = 1e-6) {
  const auto waves = standing_waves(spec.basis.n_sites());
  const auto& ev = spec.pair_spectrum.eigenvalues;
  const double scale = ev.size() ? std::max(1.0, ev.cwiseAbs().maxCoeff()) : 1.0;
  const auto degenerate = degenerate_mask(ev, 1e-10 * scale);
  SpectrumClassification out;
  out.states.reserve(spec.states.size());
  for (std::size_t i = 0; i < spec.states.size(); ++i) {
    auto c = classify_state(spec.states[i], th, &waves);
    if (c.status == ClassStatus::Ok && degenerate[i]) c.status = ClassStatus::DegenerateEnergy;
    if (c.status == ClassStatus::Ok && spec.states[i].residual > residual_cutoff) {
      c.status = ClassStatus::LargeResidual;
    }
    if (c.status != ClassStatus::Ok) c.is_cross = false;
    out.cross_count += c.is_cross ? 1 : 0;
    out.states.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fourier maps

enum class FourierGrid {
  FullZone,  // k_j = 2 pi j / N: unitary with 1/sqrt(N) per axis
  HalfZone,  // k_j = pi j / N: plotting range [0, pi)
};

inline VectorXd fourier_k_grid(int n, FourierGrid grid = FourierGrid::FullZone) {
  const double step = (grid == FourierGrid::FullZone ? 2.0 : 1.0) * std::numbers::pi / n;
  VectorXd k(n);
  for (int j = 0; j < n; ++j) k(j) = step * j;
  return k;
}

namespace detail {
/// F(j, n) = exp(-i k_j n) with 1-based site n.
inline MatrixXcd fourier_matrix(const VectorXd& k, int n_sites) {
  MatrixXcd f(k.size(), n_sites);
  for (Eigen::Index j = 0; j < k.size(); ++j) {
    for (int n = 1; n <= n_sites; ++n) f(j, n - 1) = std::polar(1.0, -k(j) * n);
  }
  return f;
}
}  // namespace detail

struct SpectralDensity1D {
  VectorXd k;
  VectorXd density;  // |sum_n exp(-i k n) psi_mn|^2
};

/// Transform along the second coordinate at fixed first coordinate m (1-based).
inline SpectralDensity1D fourier_1d(const MatrixXcd& psi, int m, FourierGrid grid = FourierGrid::FullZone) {
  const int n = static_cast<int>(psi.rows());
  if (m < 1 || m > n) throw ConfigError("fourier_1d: site index " + std::to_string(m) + " out of range");
  SpectralDensity1D out;
  out.k = fourier_k_grid(n, grid);
  const VectorXcd row = psi.row(m - 1).transpose();
  out.density = (detail::fourier_matrix(out.k, n) * row).cwiseAbs2();
  return out;
}

/// density(a, b) = |sum_mn exp(-i k_a m - i k_b n) psi_mn|^2.
inline MatrixXd fourier_2d(const MatrixXcd& psi, FourierGrid grid = FourierGrid::FullZone) {
  const int n = static_cast<int>(psi.rows());
  const MatrixXcd f = detail::fourier_matrix(fourier_k_grid(n, grid), n);
  return (f * psi * f.transpose()).cwiseAbs2();
}

/// IPR of a density viewed as a distribution over k.
inline double spectral_ipr(const VectorXd& density) {
  const double total = density.sum();
  if (total <= 0.0) return 0.0;
  return (density / total).squaredNorm();
}

// ---------------------------------------------------------------------------
// Phase diagram

struct PhaseGrid {
  std::vector<double> phases;
  std::vector<Interaction> interactions;
};

/// 21 phases on [0.05, pi] and chi in {0, 10^-1 .. 10^3 (13 log-spaced), inf}.
inline PhaseGrid default_phase_grid() {
  PhaseGrid g;
  for (int i = 0; i <= 20; ++i) g.phases.push_back(0.05 + i * (std::numbers::pi - 0.05) / 20.0);
  g.interactions.push_back(Interaction::finite(0.0));
  for (int j = 0; j <= 12; ++j) g.interactions.push_back(Interaction::finite(std::pow(10.0, -1.0 + j / 3.0)));
  g.interactions.push_back(Interaction::hard_core());
  return g;
}

struct CellFailure {
  std::size_t phase_index;
  std::size_t chi_index;
  std::string message;
};

struct PhaseDiagram {
  std::vector<double> phases;
  std::vector<Interaction> interactions;
  MatrixXd fraction;  // rows = phase, cols = chi; NaN where the cell failed
  std::vector<CellFailure> failures;

  double success_ratio() const {
    const auto cells = static_cast<double>(fraction.size());
    return cells == 0 ? 0.0 : 1.0 - static_cast<double>(failures.size()) / cells;
  }
};

/// Cross-state fraction on every grid cell. Cells run on `jobs` workers;
/// each result lands in its own slot so the output does not depend on
/// scheduling.
inline PhaseDiagram phase_diagram(int n_qubits, const PhaseGrid& grid, const Thresholds& th = {},
                                  unsigned jobs = 1, double gamma0 = 1.0) {
  if (grid.phases.empty() || grid.interactions.empty()) throw ConfigError("phase diagram grids must be nonempty");
  PhaseDiagram out{grid.phases, grid.interactions,
                   MatrixXd::Constant(static_cast<Eigen::Index>(grid.phases.size()),
                                      static_cast<Eigen::Index>(grid.interactions.size()),
                                      std::numeric_limits<double>::quiet_NaN()),
                   {}};
  const std::size_t n_chi = grid.interactions.size();
  const std::size_t total = grid.phases.size() * n_chi;
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t cell = next++; cell < total; cell = next++) {
      const std::size_t i = cell / n_chi, j = cell % n_chi;
      try {
        ArrayConfig cfg{n_qubits, grid.phases[i], gamma0, grid.interactions[j]};
        const auto spec = two_excitation_spectrum(cfg);
        out.fraction(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            classify_spectrum(spec, th).cross_fraction();
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        out.failures.push_back({i, j, e.what()});
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(total)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  std::sort(out.failures.begin(), out.failures.end(), [](const CellFailure& a, const CellFailure& b) {
    return std::tie(a.phase_index, a.chi_index) < std::tie(b.phase_index, b.chi_index);
  });
  return out;
}

}  // namespace qls

#pragma once

// Local two-photon wave equation for the field amplitude E = H psi H, its
// Green's functions and the reduced operator for the diagonal E(x, x).
//
// All energies here are real ratios eps / (phi gamma0); radiative decay is
// neglected in this part of the library.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qls/config.hpp"
#include "qls/linalg.hpp"
#include "qls/model.hpp"
#include "qls/spectra.hpp"

namespace qls {

// ---------------------------------------------------------------------------
// Transformed equation
//
//   (I - D)(dx2 + dy2) E = lambda dx2 dy2 E,   D zeroes the x == y rows,
//
// restricted to symmetric E and to the complement of the null space of
// dx2 dy2 (span of e (x) u_n and u_n (x) e, e the constant mode).

struct TransformedState {
  double energy_ratio;  // lambda = eps / (phi gamma0)
  MatrixXd field;       // symmetric, sum E^2 = 1
};

struct TransformedSpectrum {
  std::vector<TransformedState> states;  // ascending lambda
  int deflated = 0;                      // infinite eigenvalues removed (2N - 1)
};

inline TransformedSpectrum solve_transformed_equation(int n, double phase, bool interaction = true) {
  if (n < 2) throw ConfigError("transformed equation: deflation leaves no space for N < 2");
  if (!(phase > 0.0)) throw ConfigError("transformed equation needs phase > 0");
  const auto waves = standing_waves(n);
  const VectorXd& lam = waves.eigenvalues;

  struct Mode { int p, q; };  // 0-based standing-wave indices, 1 <= p <= q
  std::vector<Mode> modes;
  for (int p = 1; p < n; ++p)
    for (int q = p; q < n; ++q) modes.push_back({p, q});
  const auto dim = static_cast<Eigen::Index>(modes.size());

  // diag[S_a](x): diagonal of the normalized symmetric product state a.
  MatrixXd diag_part(dim, n);
  VectorXd scale(dim);  // sqrt(|lam_p + lam_q| / (lam_p lam_q))
  for (Eigen::Index a = 0; a < dim; ++a) {
    const auto [p, q] = modes[static_cast<std::size_t>(a)];
    const double w = p == q ? 1.0 : std::numbers::sqrt2;
    diag_part.row(a) = w * waves.modes.col(p).cwiseProduct(waves.modes.col(q)).transpose();
    scale(a) = std::sqrt(-(lam(p) + lam(q)) / (lam(p) * lam(q)));
  }
  // (I - Q) Sigma c = lambda Pi c  <=>  -(d (I - Q) d) z = lambda z,  c = d z / abs(Sigma).
  MatrixXd sym = MatrixXd::Identity(dim, dim);
  if (interaction) sym.noalias() -= diag_part * diag_part.transpose();
  sym = scale.asDiagonal() * sym * scale.asDiagonal();
  const auto eig = linalg::eig_symmetric(std::move(sym));

  TransformedSpectrum out;
  out.deflated = 2 * n - 1;
  out.states.reserve(static_cast<std::size_t>(dim));
  for (Eigen::Index col = dim - 1; col >= 0; --col) {
    MatrixXd coeff = MatrixXd::Zero(n, n);
    for (Eigen::Index a = 0; a < dim; ++a) {
      const auto [p, q] = modes[static_cast<std::size_t>(a)];
      const double c = eig.vectors(a, col) * scale(a) / -(lam(p) + lam(q));
      if (p == q) {
        coeff(p, p) = c;
      } else {
        coeff(p, q) = c / std::numbers::sqrt2;
        coeff(q, p) = c / std::numbers::sqrt2;
      }
    }
    MatrixXd field = waves.modes * coeff * waves.modes.transpose();
    field /= field.norm();
    out.states.push_back({-eig.values(col), std::move(field)});
  }
  return out;
}

/// Two-excitation amplitude implied by a field: psi ~ d2 E d2, unit norm.
inline MatrixXcd reconstruct_two_photon_amplitude(const MatrixXd& field) {
  const auto d2 = build_d2_matrix(static_cast<int>(field.rows()));
  MatrixXd psi = d2.matrix * field * d2.matrix;
  const double nrm = psi.norm();
  if (nrm > 0.0) psi /= nrm;
  return psi.cast<cplx>();
}

// ---------------------------------------------------------------------------
// Green's functions of the non-interacting transformed equation
//
//   [(dx2 + dy2) - lambda dx2 dy2] G = delta_{x,x'} delta_{y,y'}

struct GreensFunction {
  int source_x = 0;  // 1-based
  int source_y = 0;
  double energy_ratio = 0.0;
  MatrixXd values;  // values(x-1, y-1)
  double residual = 0.0;
};

namespace detail {

/// Pole of the non-interacting problem closest to lambda.
inline double nearest_transformed_pole(int n, double lambda) {
  const auto waves = standing_waves(n);
  double best = std::numeric_limits<double>::infinity();
  for (int p = 1; p < n; ++p) {
    for (int q = p; q < n; ++q) {
      const double pole = 1.0 / waves.eigenvalues(p) + 1.0 / waves.eigenvalues(q);
      if (std::abs(pole - lambda) < std::abs(best - lambda)) best = pole;
    }
  }
  return best;
}

inline void check_source(int n, int x, int y) {
  if (x < 1 || x > n || y < 1 || y > n) throw ConfigError("Green's function source outside the array");
}

}  // namespace detail

/// Dense LU solve on the N^2 grid. The right-hand side is projected onto the
/// complement of the dx2 dy2 null space before solving.
inline GreensFunction greens_function_direct(int n, double lambda, int source_x, int source_y) {
  if (n < 2) throw ConfigError("Green's function needs N >= 2");
  detail::check_source(n, source_x, source_y);
  const double pole = detail::nearest_transformed_pole(n, lambda);
  if (std::abs(pole - lambda) < 1e-6 * std::max(1.0, std::abs(lambda))) {
    throw SingularityError("energy ratio " + std::to_string(lambda) +
                           " is resonant with the non-interacting eigenvalue " + std::to_string(pole));
  }
  const auto d2 = build_d2_matrix(n).matrix;
  const MatrixXd id = MatrixXd::Identity(n, n);
  const MatrixXd avg = MatrixXd::Constant(n, n, 1.0 / n);
  // Column-major vec(G): index (x-1) + n (y-1). dx2 acts on x -> I (x) d2.
  auto kron = [n](const MatrixXd& a, const MatrixXd& b) {
    MatrixXd k(n * n, n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) k.block(i * n, j * n, n, n) = a(i, j) * b;
    return k;
  };
  const MatrixXd dx = kron(id, d2);
  const MatrixXd dy = kron(d2, id);
  const MatrixXd op = dx + dy - lambda * (dx * dy);
  const MatrixXd null_proj = kron(id, avg) + kron(avg, id) - kron(avg, avg);

  VectorXd rhs = VectorXd::Zero(n * n);
  rhs((source_x - 1) + n * (source_y - 1)) = 1.0;
  rhs -= null_proj * rhs;
  // op maps the null space to itself with eigenvalues lam_q in [-2, 0];
  // the shift makes the system nonsingular there without touching the complement.
  const VectorXd g = (op + 4.0 * null_proj).partialPivLu().solve(rhs);

  GreensFunction out{source_x, source_y, lambda, Eigen::Map<const MatrixXd>(g.data(), n, n), 0.0};
  out.residual = (op * g - rhs).lpNorm<Eigen::Infinity>();
  if (!std::isfinite(out.residual)) throw SolverError("Green's function solve produced non-finite values");
  return out;
}

struct ShortRangeKernel {
  MatrixXd values;      // g(y, y') = sum_{m >= n_min} u_m(y) u_m(y') / k_m^2
  double kappa_fit = 0.0;
  double amplitude = 0.0;  // fitted g at zero separation
};

/// Short-range kernel with an exponential fit of log|g| over separations
/// 1..floor(N/4). With a reference site the fit uses that row only; otherwise
/// every (y, y') pair in range.
inline ShortRangeKernel short_range_g(int n, int n_min, std::optional<int> reference_site = std::nullopt) {
  if (!(n_min > 1 && n_min < n)) throw ConfigError("short_range_g requires 1 < n_min < N");
  if (reference_site && (*reference_site < 1 || *reference_site > n)) throw ConfigError("reference site outside the array");
  const auto waves = standing_waves(n);
  ShortRangeKernel out;
  out.values = MatrixXd::Zero(n, n);
  for (int m = n_min; m <= n; ++m) {
    const double k = waves.wave_numbers(m - 1);
    out.values += waves.modes.col(m - 1) * waves.modes.col(m - 1).transpose() / (k * k);
  }

  const int max_sep = n / 4;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  const int first = reference_site.value_or(1);
  const int last = reference_site.value_or(n);
  for (int yp = first; yp <= last; ++yp) {
    for (int y = 1; y <= n; ++y) {
      const int s = std::abs(y - yp);
      const double v = std::abs(out.values(y - 1, yp - 1));
      if (s < 1 || s > max_sep || v == 0.0) continue;
      const double ly = std::log(v);
      sx += s; sy += ly; sxx += double(s) * s; sxy += s * ly;
      ++count;
    }
  }
  if (count >= 2) {
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    out.kappa_fit = -slope;
    out.amplitude = std::exp((sy - slope * sx) / count);
  }
  return out;
}

/// Separable near-resonance form
///   G ~ a / de [u0(x) u0(x') g(y, y') + u0(y) u0(y') g(x, x')],
/// a = 1/k0^2, de = lambda - lambda0 / 2, lambda0 = -2 / k0^2 (lower-branch
/// resonance of standing wave n0 in units of phi gamma0).
inline GreensFunction greens_function_resonant(int n, double lambda, int n0, int n_min, int source_x,
                                               int source_y) {
  detail::check_source(n, source_x, source_y);
  if (n0 < 2 || n0 > n) throw ConfigError("resonant mode index must satisfy 2 <= n0 <= N");
  const auto waves = standing_waves(n);
  const double k0 = waves.wave_numbers(n0 - 1);
  const double a = 1.0 / (k0 * k0);
  const double resonance = -2.0 / (k0 * k0);
  const double detuning = lambda - resonance / 2.0;
  if (detuning == 0.0) throw SingularityError("resonant Green's function: zero detuning");
  const VectorXd u0 = waves.modes.col(n0 - 1);
  const MatrixXd g = short_range_g(n, n_min).values;
  GreensFunction out{source_x, source_y, lambda, MatrixXd(n, n), 0.0};
  out.values = (a / detuning) * (u0(source_x - 1) * u0 * g.col(source_y - 1).transpose() +
                                  u0(source_y - 1) * g.col(source_x - 1) * u0.transpose());
  return out;
}

// ---------------------------------------------------------------------------
// Reduced operator for the diagonal E(x, x)
//
//   L = 2a diag[u0] (d2 - kappa^2)^{-1} diag[u0] d2,  a = 1 / k0^2.

struct LOperator {
  int size = 0;
  double kappa = 0.0;
  int n0 = 0;
  double k0 = 0.0;
  double a = 0.0;
  VectorXd u0;
  MatrixXd matrix;
};

inline LOperator build_L_operator(int n, double kappa, int n0) {
  if (!(kappa > 0.0)) throw ConfigError("L operator needs kappa > 0");
  if (n0 < 2 || n0 > n) throw ConfigError("L operator needs 2 <= n0 <= N");
  const auto waves = standing_waves(n);
  const auto d2 = build_d2_matrix(n).matrix;
  LOperator op;
  op.size = n;
  op.kappa = kappa;
  op.n0 = n0;
  op.k0 = waves.wave_numbers(n0 - 1);
  op.a = 1.0 / (op.k0 * op.k0);
  op.u0 = waves.modes.col(n0 - 1);
  // kappa^2 - d2 is positive definite.
  const MatrixXd shifted = kappa * kappa * MatrixXd::Identity(n, n) - d2;
  const MatrixXd rhs = op.u0.asDiagonal() * d2;
  const MatrixXd inv_applied = -shifted.llt().solve(rhs);
  op.matrix = 2.0 * op.a * op.u0.asDiagonal() * inv_applied;
  return op;
}

/// Eigenpairs of L ordered by |delta eps| ascending (ties by (Re, Im)).
inline ComplexSpectrum solve_L(const LOperator& op) {
  auto spec = eigensolve_dense(op.matrix.cast<cplx>());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(spec.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return std::abs(spec.eigenvalues(i)) < std::abs(spec.eigenvalues(j));
  });
  ComplexSpectrum out = spec;
  for (std::size_t j = 0; j < order.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    out.eigenvalues(col) = spec.eigenvalues(order[j]);
    out.eigenvectors.col(col) = spec.eigenvectors.col(order[j]);
    out.residuals(col) = spec.residuals(order[j]);
  }
  return out;
}

/// 1-based site of the largest |v|; near-ties (odd profiles) go to the lower site.
inline int peak_site(const VectorXd& v) {
  const double top = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) >= top * (1.0 - 1e-9)) return static_cast<int>(i) + 1;
  return 0;
}

/// 1-based position of the node of u0 closest to the array center.
inline double standing_wave_node(int n, int n0) {
  if (n0 < 2) throw ConfigError("mode n0 = 1 has no node");
  // cos(k0 (x - 1/2)) = 0  ->  x = 1/2 + N (j + 1/2) / (n0 - 1)
  const double center = 0.5 * (n + 1);
  double best = 0.0, dist = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n0 - 1; ++j) {
    const double x = 0.5 + n * (j + 0.5) / (n0 - 1);
    if (std::abs(x - center) < dist) { dist = std::abs(x - center); best = x; }
  }
  return best;
}

/// Discretized odd profile x theta(x0^2 - x^2) around `center` (1-based,
/// integer or half-integer), unit norm. When the support holds no nonzero
/// offset it degenerates to the discrete derivative of a delta function.
inline VectorXd analytic_odd_profile(double x0, double center, int n) {
  if (!(x0 > 0.0) || !(x0 < 0.5 * n)) throw ConfigError("analytic profile needs 0 < x0 < N/2");
  VectorXd v = VectorXd::Zero(n);
  for (int site = 1; site <= n; ++site) {
    const double x = site - center;
    if (std::abs(x) < x0) v(site - 1) = x;
  }
  if (v.norm() == 0.0) {
    const double step = std::abs(center - std::round(center)) > 0.25 ? 0.5 : 1.0;
    for (int site = 1; site <= n; ++site) {
      const double x = site - center;
      if (std::abs(std::abs(x) - step) < 1e-9) v(site - 1) = x > 0 ? 1.0 : -1.0;
    }
  }
  const double nrm = v.norm();
  if (nrm == 0.0) throw ConfigError("analytic profile center lies outside the array");
  return v / nrm;
}

/// Continuum energy of the odd state with half-width x0 for an operator whose
/// standing wave has slope `node_slope` at its node: 2 a slope^2 x0^2.
/// With the unnormalized cos(k0 x) (slope k0, a = 1/k0^2) this is 2 x0^2.
inline double analytic_odd_energy(double x0, double node_slope, double a) {
  return 2.0 * a * node_slope * node_slope * x0 * x0;
}

/// Discrete slope of u0 at its node (central difference over the node).
inline double node_slope(const LOperator& op) {
  const double node = standing_wave_node(op.size, op.n0);
  const int left = static_cast<int>(std::floor(node - 0.5 + 1e-9));  // 1-based site below
  if (std::abs(node - std::round(node)) < 1e-9) {
    const int c = static_cast<int>(std::round(node));
    return (op.u0(c) - op.u0(c - 2)) / 2.0;
  }
  return op.u0(left) - op.u0(left - 1);
}

struct OddProfileFit {
  double x0 = 0.0;
  double overlap = 0.0;
};

/// Half-width x0 (support boundary + 1/2) maximizing |<profile, v>|.
inline OddProfileFit fit_odd_profile(const VectorXd& v, double center) {
  const int n = static_cast<int>(v.size());
  OddProfileFit best;
  const VectorXd unit = v.normalized();
  for (double x0 = 0.5 + (std::abs(center - std::round(center)) < 0.25 ? 1.0 : 0.5); x0 < 0.5 * n; x0 += 1.0) {
    const double ov = std::abs(analytic_odd_profile(x0, center, n).dot(unit));
    if (ov > best.overlap) best = {x0, ov};
  }
  return best;
}

}  // namespace qls

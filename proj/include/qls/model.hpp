#pragma once

// Matrices of the qubit-array model: the single-excitation Hamiltonian, the
// two-excitation operator on a symmetric pair basis, and the discrete
// second-derivative operator with its standing-wave eigenbasis.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qls/config.hpp"
#include "qls/linalg.hpp"

namespace qls {

/// H[m][n] = -i gamma0 exp(i phase |m - n|). Complex symmetric, not Hermitian.
inline MatrixXcd build_single_hamiltonian(const ArrayConfig& cfg) {
  cfg.validate(1);
  const int n = cfg.n_qubits;
  MatrixXcd h(n, n);
  const cplx minus_i_gamma(0.0, -cfg.gamma0);
  for (int d = 0; d < n; ++d) {
    const cplx value = minus_i_gamma * std::polar(1.0, cfg.phase * d);
    for (int m = 0; m + d < n; ++m) {
      h(m, m + d) = value;
      h(m + d, m) = value;
    }
  }
  return h;
}

enum class PairMode { HardCore, FiniteChi };

inline PairMode pair_mode_for(const Interaction& chi) {
  return chi.is_hard_core() ? PairMode::HardCore : PairMode::FiniteChi;
}

/// Unordered site pair with 1-based labels, m < n (hard core) or m <= n.
struct SitePair {
  int m;
  int n;
  friend bool operator==(const SitePair&, const SitePair&) = default;
};

/// Lexicographically ordered basis of symmetric two-excitation states.
class PairBasis {
 public:
  PairBasis(int n_sites, PairMode mode) : n_sites_(n_sites), mode_(mode) {
    if (n_sites < 2) throw ConfigError("pair basis needs at least 2 sites");
    const int shift = mode == PairMode::HardCore ? 1 : 0;
    for (int m = 1; m <= n_sites; ++m) {
      for (int n = m + shift; n <= n_sites; ++n) pairs_.push_back({m, n});
    }
  }

  int n_sites() const { return n_sites_; }
  PairMode mode() const { return mode_; }
  std::size_t size() const { return pairs_.size(); }
  const std::vector<SitePair>& pairs() const { return pairs_; }
  const SitePair& operator[](std::size_t row) const { return pairs_[row]; }

  /// Row of the pair {m, n} (either order). Throws if the pair is not in the basis.
  std::size_t index_of(int m, int n) const {
    if (m > n) std::swap(m, n);
    if (m < 1 || n > n_sites_ || (mode_ == PairMode::HardCore && m == n)) {
      throw ConfigError("pair (" + std::to_string(m) + "," + std::to_string(n) +
                        ") not in basis");
    }
    // Rows preceding first index m: sum over i < m of (N - i + 1 - shift).
    const int shift = mode_ == PairMode::HardCore ? 1 : 0;
    const long before = static_cast<long>(m - 1) * (n_sites_ + 1 - shift) -
                        static_cast<long>(m - 1) * m / 2;
    return static_cast<std::size_t>(before + (n - m - shift));
  }

 private:
  int n_sites_;
  PairMode mode_;
  std::vector<SitePair> pairs_;
};

/// Matrix of psi -> H psi + psi H (+ chi on doubly occupied sites) in the
/// normalized pair basis. Its eigenvalues are the pair energies 2*eps.
///
/// In the hard-core basis this is exactly the operator
/// H psi + psi H - 2 diag[diag(H psi)] on rows m != n with psi_nn = 0.
inline MatrixXcd build_two_excitation_hamiltonian(const ArrayConfig& cfg, const PairBasis& basis) {
  cfg.validate(2);
  if (basis.n_sites() != cfg.n_qubits) throw ConfigError("pair basis size does not match config");
  if (basis.mode() != pair_mode_for(cfg.chi)) {
    throw ConfigError("pair basis mode does not match interaction (hard core iff chi = inf)");
  }
  const MatrixXcd h = build_single_hamiltonian(cfg);
  const auto dim = static_cast<Eigen::Index>(basis.size());
  MatrixXcd out(dim, dim);

  // For E_pq = e_p e_q^T + e_q e_p^T, <E_mn, H E_pq + E_pq H> = 2 X_mn with
  // X_mn = H_mp d_qn + H_mq d_pn + d_mp H_qn + d_mq H_pn.
  // Normalized states divide by |E_mn| |E_pq|, |E| = sqrt(2) (m != n) or 2.
  std::vector<double> norm(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    norm[i] = basis[i].m == basis[i].n ? 2.0 : std::numbers::sqrt2;
  }
  for (Eigen::Index j = 0; j < dim; ++j) {
    const int p = basis[static_cast<std::size_t>(j)].m - 1;
    const int q = basis[static_cast<std::size_t>(j)].n - 1;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const int m = basis[static_cast<std::size_t>(i)].m - 1;
      const int n = basis[static_cast<std::size_t>(i)].n - 1;
      cplx x = 0.0;
      if (q == n) x += h(m, p);
      if (p == n) x += h(m, q);
      if (m == p) x += h(q, n);
      if (m == q) x += h(p, n);
      out(i, j) = 2.0 * x / (norm[static_cast<std::size_t>(i)] * norm[static_cast<std::size_t>(j)]);
    }
  }
  if (!cfg.chi.is_hard_core()) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      const auto& pr = basis[static_cast<std::size_t>(i)];
      if (pr.m == pr.n) out(i, i) += cfg.chi.value();
    }
  }
  return out;
}

/// The N x N discrete second derivative: 1/2 tridiag(1, -2, 1) with corner
/// diagonal entries -1/2 (open boundaries; constants are a zero mode).
struct DiscreteLaplacian {
  int size = 0;
  MatrixXd matrix;
};

inline DiscreteLaplacian build_d2_matrix(int n) {
  if (n < 2) throw ConfigError("second-derivative operator needs N >= 2");
  DiscreteLaplacian d{n, MatrixXd::Zero(n, n)};
  for (int i = 0; i < n; ++i) {
    d.matrix(i, i) = -1.0;
    if (i > 0) d.matrix(i, i - 1) = 0.5;
    if (i + 1 < n) d.matrix(i, i + 1) = 0.5;
  }
  d.matrix(0, 0) = -0.5;
  d.matrix(n - 1, n - 1) = -0.5;
  return d;
}

/// Closed-form eigenbasis of the discrete second derivative:
/// u_n(x) ~ cos(k_n (x - 1/2)), k_n = pi (n - 1) / N, eigenvalue cos(k_n) - 1.
/// Column j holds the standing wave with 1-based index n = j + 1.
struct StandingWaves {
  VectorXd wave_numbers;
  VectorXd eigenvalues;
  MatrixXd modes;  // orthonormal columns
};

inline StandingWaves standing_waves(int n) {
  if (n < 1) throw ConfigError("standing waves need N >= 1");
  StandingWaves sw{VectorXd(n), VectorXd(n), MatrixXd(n, n)};
  for (int j = 0; j < n; ++j) {
    const double k = std::numbers::pi * j / n;
    sw.wave_numbers(j) = k;
    sw.eigenvalues(j) = std::cos(k) - 1.0;
    const double c = std::sqrt((j == 0 ? 1.0 : 2.0) / n);
    for (int x = 1; x <= n; ++x) sw.modes(x - 1, j) = c * std::cos(k * (x - 0.5));
  }
  return sw;
}

}  // namespace qls

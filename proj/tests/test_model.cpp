#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qls/model.hpp"

using namespace qls;

namespace {

ArrayConfig make(int n, double phase, Interaction chi = Interaction::hard_core()) {
  ArrayConfig c;
  c.n_qubits = n;
  c.phase = phase;
  c.chi = chi;
  return c;
}

// Reference operator acting on full symmetric N x N amplitudes:
// psi -> H psi + psi H + chi diag(psi) (finite chi) or the same with the
// diagonal discarded (hard core), projected back onto the normalized pair basis.
MatrixXcd reference_pair_matrix(const ArrayConfig& cfg, const PairBasis& basis) {
  const MatrixXcd h = build_single_hamiltonian(cfg);
  const int n = cfg.n_qubits;
  auto state = [&](std::size_t i) {
    MatrixXcd e = MatrixXcd::Zero(n, n);
    const auto [p, q] = basis[i];
    e(p - 1, q - 1) += 1.0;
    e(q - 1, p - 1) += 1.0;
    return MatrixXcd(e / e.norm());
  };
  const auto dim = static_cast<Eigen::Index>(basis.size());
  MatrixXcd m(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    const MatrixXcd psi = state(std::size_t(j));
    MatrixXcd out = h * psi + psi * h;
    if (cfg.chi.is_hard_core()) {
      out.diagonal().setZero();
    } else {
      out.diagonal() += cfg.chi.value() * psi.diagonal();
    }
    for (Eigen::Index i = 0; i < dim; ++i) m(i, j) = state(std::size_t(i)).cwiseProduct(out).sum();
  }
  return m;
}

}  // namespace

TEST(SingleHamiltonian, EntriesFollowDistance) {
  const auto h = build_single_hamiltonian(make(5, 0.3));
  for (int m = 0; m < 5; ++m)
    for (int n = 0; n < 5; ++n)
      EXPECT_NEAR(std::abs(h(m, n) - cplx(0, -1) * std::exp(cplx(0, 0.3 * std::abs(m - n)))), 0.0, 1e-15);
}

TEST(SingleHamiltonian, ExactlySymmetric) {
  for (double phi : {0.0, 0.05, 1.3, std::numbers::pi}) {
    const auto h = build_single_hamiltonian(make(17, phi));
    EXPECT_EQ((h - h.transpose()).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(SingleHamiltonian, TwoSitesAtZeroPhase) {
  const auto h = build_single_hamiltonian(make(2, 0.0));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_EQ(h(i, j), cplx(0, -1));
}

TEST(SingleHamiltonian, CommutesWithMirror) {
  const auto h = build_single_hamiltonian(make(9, 0.7));
  const MatrixXcd j = MatrixXcd::Identity(9, 9).rowwise().reverse();
  EXPECT_LT((j * h - h * j).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SingleHamiltonian, RejectsBadConfig) {
  EXPECT_THROW(build_single_hamiltonian(make(0, 0.1)), ConfigError);
  auto c = make(3, std::nan(""));
  EXPECT_THROW(build_single_hamiltonian(c), ConfigError);
}

TEST(PairBasis, HardCoreThreeSites) {
  PairBasis b(3, PairMode::HardCore);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0], (SitePair{1, 2}));
  EXPECT_EQ(b[1], (SitePair{1, 3}));
  EXPECT_EQ(b[2], (SitePair{2, 3}));
}

TEST(PairBasis, FiniteChiThreeSites) {
  PairBasis b(3, PairMode::FiniteChi);
  ASSERT_EQ(b.size(), 6u);
  int diagonal = 0;
  for (const auto& p : b.pairs()) diagonal += p.m == p.n;
  EXPECT_EQ(diagonal, 3);
}

TEST(PairBasis, Dimensions) {
  EXPECT_EQ(PairBasis(51, PairMode::HardCore).size(), 1275u);
  EXPECT_EQ(PairBasis(51, PairMode::FiniteChi).size(), 1326u);
}

TEST(PairBasis, IndexOfMatchesPosition) {
  for (auto mode : {PairMode::HardCore, PairMode::FiniteChi}) {
    PairBasis b(7, mode);
    for (std::size_t i = 0; i < b.size(); ++i) {
      EXPECT_EQ(b.index_of(b[i].m, b[i].n), i);
      EXPECT_EQ(b.index_of(b[i].n, b[i].m), i);
    }
  }
  PairBasis hc(4, PairMode::HardCore);
  EXPECT_THROW(hc.index_of(2, 2), ConfigError);
  EXPECT_THROW(hc.index_of(0, 2), ConfigError);
  EXPECT_THROW(hc.index_of(1, 5), ConfigError);
  EXPECT_THROW(PairBasis(1, PairMode::HardCore), ConfigError);
}

TEST(TwoExcitationMatrix, MatchesReferenceOperator) {
  for (auto chi : {Interaction::hard_core(), Interaction::finite(0.0), Interaction::finite(2.5)}) {
    const auto cfg = make(5, 0.37, chi);
    PairBasis basis(5, pair_mode_for(chi));
    const auto m = build_two_excitation_hamiltonian(cfg, basis);
    EXPECT_LT((m - reference_pair_matrix(cfg, basis)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(TwoExcitationMatrix, ComplexSymmetric) {
  const auto cfg = make(6, 0.2);
  const auto m = build_two_excitation_hamiltonian(cfg, PairBasis(6, PairMode::HardCore));
  EXPECT_LT((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(TwoExcitationMatrix, TraceIdentities) {
  for (int n : {3, 8, 13}) {
    const auto hc = build_two_excitation_hamiltonian(make(n, 0.4), PairBasis(n, PairMode::HardCore));
    EXPECT_NEAR(std::abs(hc.trace() - cplx(0, -double(n * (n - 1)))), 0.0, 1e-12);
    const double chi = 3.0;
    const auto fc = build_two_excitation_hamiltonian(make(n, 0.4, Interaction::finite(chi)),
                                                     PairBasis(n, PairMode::FiniteChi));
    const cplx expected = cplx(0, -double(n * (n - 1))) + double(n) * cplx(chi, -2.0);
    EXPECT_NEAR(std::abs(fc.trace() - expected), 0.0, 1e-12);
  }
}

TEST(TwoExcitationMatrix, MirrorRelabelingInvariant) {
  const int n = 7;
  PairBasis basis(n, PairMode::HardCore);
  const auto m = build_two_excitation_hamiltonian(make(n, 0.9), basis);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i)
    perm.indices()(Eigen::Index(i)) = int(basis.index_of(n + 1 - basis[i].m, n + 1 - basis[i].n));
  const MatrixXcd pm = perm * m * perm.transpose();
  EXPECT_LT((pm - m).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(TwoExcitationMatrix, RejectsMismatchedBasis) {
  EXPECT_THROW(build_two_excitation_hamiltonian(make(4, 0.1), PairBasis(5, PairMode::HardCore)), ConfigError);
  EXPECT_THROW(build_two_excitation_hamiltonian(make(4, 0.1), PairBasis(4, PairMode::FiniteChi)), ConfigError);
}

TEST(SecondDerivative, ThreeSites) {
  const auto d = build_d2_matrix(3).matrix;
  MatrixXd expected(3, 3);
  expected << -1, 1, 0, 1, -2, 1, 0, 1, -1;
  EXPECT_EQ(d, 0.5 * expected);
}

TEST(SecondDerivative, ConstantIsZeroMode) {
  for (int n : {2, 5, 40}) EXPECT_EQ((build_d2_matrix(n).matrix * VectorXd::Ones(n)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(build_d2_matrix(1), ConfigError);
}

TEST(SecondDerivative, StandingWavesAreEigenpairs) {
  for (int n : {2, 6, 31}) {
    const auto d = build_d2_matrix(n).matrix;
    const auto sw = standing_waves(n);
    EXPECT_LT((d * sw.modes - sw.modes * sw.eigenvalues.asDiagonal()).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((sw.modes.transpose() * sw.modes - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-13);
    // against a numerical diagonalization
    const auto eig = linalg::eig_symmetric(d);
    VectorXd analytic = sw.eigenvalues;
    std::sort(analytic.data(), analytic.data() + n);
    EXPECT_LT((eig.values - analytic).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(SecondDerivative, SmallWaveNumberLimit) {
  const auto sw = standing_waves(101);
  for (int j = 1; j < 5; ++j) {
    const double k = sw.wave_numbers(j);
    EXPECT_NEAR(sw.eigenvalues(j), -k * k / 2, k * k * k * k / 20);
  }
}

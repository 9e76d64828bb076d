#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qls/spectra.hpp"

using namespace qls;

namespace {

ArrayConfig make(int n, double phase, Interaction chi = Interaction::hard_core()) {
  ArrayConfig c;
  c.n_qubits = n;
  c.phase = phase;
  c.chi = chi;
  return c;
}

MatrixXcd random_matrix(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> d;
  MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(d(rng), d(rng));
  return m;
}

std::vector<cplx> sorted(std::vector<cplx> v) {
  std::sort(v.begin(), v.end(), linalg::complex_less);
  return v;
}

}  // namespace

TEST(EigensolveDense, Diagonal) {
  MatrixXcd m = MatrixXcd::Zero(2, 2);
  m(0, 0) = 3.0;
  m(1, 1) = cplx(1, 2);
  const auto s = eigensolve_dense(m);
  EXPECT_EQ(s.eigenvalues(0), cplx(1, 2));
  EXPECT_EQ(s.eigenvalues(1), cplx(3, 0));
  EXPECT_EQ(s.size(), 2);
}

TEST(EigensolveDense, TwoSitesZeroPhase) {
  // Both real parts are zero up to rounding, so the (Re, Im) order is not pinned.
  const auto s = single_particle_spectrum(make(2, 0.0));
  std::vector<cplx> ev(s.eigenvalues.begin(), s.eigenvalues.end());
  std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return a.imag() < b.imag(); });
  EXPECT_NEAR(std::abs(ev[0] - cplx(0, -2)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(ev[1]), 0.0, 1e-14);
}

TEST(EigensolveDense, RandomTraceAndResiduals) {
  const auto m = random_matrix(50, 7);
  const auto s = eigensolve_dense(m);
  EXPECT_LT(std::abs(s.eigenvalues.sum() - m.trace()) / std::abs(m.trace()), 1e-10);
  EXPECT_LT(s.max_residual(), 1e-8 * s.matrix_norm);
  EXPECT_EQ(s.defective_count(), 0);
  for (Eigen::Index j = 0; j < s.size(); ++j) EXPECT_NEAR(s.eigenvectors.col(j).norm(), 1.0, 1e-12);
  for (Eigen::Index j = 1; j < s.size(); ++j)
    EXPECT_FALSE(linalg::complex_less(s.eigenvalues(j), s.eigenvalues(j - 1)));
}

TEST(EigensolveDense, PhaseFixedAndRepeatable) {
  const auto m = random_matrix(20, 3);
  const auto a = eigensolve_dense(m);
  const auto b = eigensolve_dense(m);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
  EXPECT_EQ(a.eigenvectors, b.eigenvectors);
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const auto& v = a.eigenvectors.col(j);
    Eigen::Index first = 0;
    while (std::abs(v(first)) <= 1e-12 * v.cwiseAbs().maxCoeff()) ++first;
    EXPECT_EQ(v(first).imag(), 0.0);
    EXPECT_GT(v(first).real(), 0.0);
  }
}

TEST(EigensolveDense, RejectsNonFinite) {
  MatrixXcd m = MatrixXcd::Identity(3, 3);
  m(1, 2) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(eigensolve_dense(m), ConfigError);
}

TEST(SingleParticle, TraceIdentity) {
  for (int n : {1, 5, 25}) {
    for (double phi : {0.01, 0.4, 2.0}) {
      const auto s = single_particle_spectrum(make(n, phi));
      EXPECT_LT(std::abs(s.eigenvalues.sum() - cplx(0, -n)) / n, 1e-10);
    }
  }
}

TEST(SingleParticle, ParityDefiniteEigenvectors) {
  const int n = 12;
  const auto s = single_particle_spectrum(make(n, 0.3));
  for (Eigen::Index j = 0; j < n; ++j) {
    const VectorXcd v = s.eigenvectors.col(j);
    const VectorXcd r = v.reverse();
    const double even = (v + r).norm(), odd = (v - r).norm();
    EXPECT_LT(std::min(even, odd), 1e-6);
  }
}

TEST(TwoExcitation, TwoSitesHardCore) {
  const auto spec = two_excitation_spectrum(make(2, 0.0));
  ASSERT_EQ(spec.states.size(), 1u);
  EXPECT_NEAR(std::abs(spec.states[0].energy - cplx(0, -1)), 0.0, 1e-14);
  const auto& psi = spec.states[0].psi;
  EXPECT_NEAR(std::abs(psi(0, 1) - 1 / std::numbers::sqrt2), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(psi(1, 0) - 1 / std::numbers::sqrt2), 0.0, 1e-14);
  EXPECT_EQ(psi(0, 0), cplx(0));
}

TEST(TwoExcitation, StateInvariants) {
  for (auto chi : {Interaction::hard_core(), Interaction::finite(1.5)}) {
    const auto cfg = make(7, 0.45, chi);
    const auto spec = two_excitation_spectrum(cfg);
    const auto m = build_two_excitation_hamiltonian(cfg, spec.basis);
    for (const auto& s : spec.states) {
      EXPECT_LT((s.psi - s.psi.transpose()).cwiseAbs().maxCoeff(), 1e-15);
      EXPECT_NEAR(s.psi.squaredNorm(), 1.0, 1e-12);
      if (chi.is_hard_core()) EXPECT_EQ(s.psi.diagonal().cwiseAbs().maxCoeff(), 0.0);
      const VectorXcd c = fold_pair_vector(spec.basis, s.psi);
      EXPECT_LT((m * c - 2.0 * s.energy * c).norm(), 1e-6);
    }
  }
}

TEST(TwoExcitation, FoldUnfoldRoundTrip) {
  PairBasis b(6, PairMode::FiniteChi);
  VectorXcd c = random_matrix(int(b.size()), 11).col(0);
  EXPECT_LT((fold_pair_vector(b, unfold_pair_vector(b, c)) - c).norm(), 1e-15);
  EXPECT_NEAR(unfold_pair_vector(b, c).norm(), c.norm(), 1e-12);
}

TEST(TwoExcitation, HardCoreTraceIdentity) {
  for (int n : {5, 12}) {
    for (double phi : {0.01, 0.05, 0.4}) {
      const auto spec = two_excitation_spectrum(make(n, phi));
      cplx total = 0;
      for (const auto& s : spec.states) total += 2.0 * s.energy;
      EXPECT_LT(std::abs(total - cplx(0, -double(n * (n - 1)))) / (n * (n - 1)), 1e-8);
    }
  }
}

TEST(TwoExcitation, ZeroInteractionEqualsPairSums) {
  const auto cfg = make(8, 0.6, Interaction::finite(0.0));
  const auto spec = two_excitation_spectrum(cfg);
  const auto pairs = noninteracting_pair_spectrum(cfg);
  ASSERT_EQ(spec.states.size(), pairs.size());
  std::vector<cplx> eps;
  for (const auto& s : spec.states) eps.push_back(s.energy);
  eps = sorted(eps);
  for (std::size_t i = 0; i < eps.size(); ++i) EXPECT_LT(std::abs(eps[i] - pairs[i]), 1e-8);
}

TEST(TwoExcitation, LargeChiApproachesHardCore) {
  const int n = 6;
  const auto hc = two_excitation_spectrum(make(n, 0.3));
  const auto big = two_excitation_spectrum(make(n, 0.3, Interaction::finite(1e7)));
  std::vector<cplx> bounded;
  for (const auto& s : big.states)
    if (std::abs(s.energy) < 1e3) bounded.push_back(s.energy);
  ASSERT_EQ(bounded.size(), hc.states.size());
  for (const auto& s : hc.states) {
    double best = 1e300;
    for (auto e : bounded) best = std::min(best, std::abs(e - s.energy));
    EXPECT_LT(best, 1e-4);
  }
}

TEST(NoninteractingPairs, TwoSites) {
  auto p = noninteracting_pair_spectrum(make(2, 0.0));
  ASSERT_EQ(p.size(), 3u);
  std::sort(p.begin(), p.end(), [](cplx a, cplx b) { return a.imag() < b.imag(); });
  EXPECT_NEAR(std::abs(p[0] - cplx(0, -2)), 0, 1e-14);
  EXPECT_NEAR(std::abs(p[1] - cplx(0, -1)), 0, 1e-14);
  EXPECT_NEAR(std::abs(p[2]), 0, 1e-14);
}

TEST(NoninteractingPairs, ClustersAtLargerPhase) {
  const auto p = noninteracting_pair_spectrum(make(51, 0.4));
  ASSERT_EQ(p.size(), 1326u);
  std::vector<double> re;
  for (auto z : p) re.push_back(z.real());
  std::sort(re.begin(), re.end());
  // split at gaps far above the typical level spacing
  std::vector<int> sizes{1};
  for (std::size_t i = 1; i < re.size(); ++i) {
    if (re[i] - re[i - 1] > 0.25) sizes.push_back(0);
    ++sizes.back();
  }
  EXPECT_GE(std::count_if(sizes.begin(), sizes.end(), [](int s) { return s >= 10; }), 2);
}

TEST(Dispersion, ExactValues) {
  EXPECT_NEAR(exact_dispersion(0.1, 0.01), std::sin(0.01) / (std::cos(0.1) - std::cos(0.01)), 1e-15);
  EXPECT_NEAR(exact_dispersion(0.1, 0.01), -2.022, 5e-4);
  EXPECT_NEAR(exact_dispersion(std::numbers::pi, 0.01), -0.0050, 1e-4);
  EXPECT_THROW(exact_dispersion(0.01, 0.01), SingularityError);
  EXPECT_THROW(exact_dispersion(-0.3, 0.3), SingularityError);
  EXPECT_THROW(exact_dispersion(0.1, 0.0), SingularityError);
}

TEST(Dispersion, Approximation) {
  EXPECT_DOUBLE_EQ(approx_dispersion(0.1, 0.01), -2.0);
  EXPECT_LT(std::abs(exact_dispersion(0.1, 0.01) - approx_dispersion(0.1, 0.01)) / 2.022, 0.03);
  EXPECT_THROW(approx_dispersion(0.0, 0.01), SingularityError);
  EXPECT_THROW(approx_dispersion(0.1, 0.0), ConfigError);
  EXPECT_NEAR(approx_wave_number(-2.57, 0.05), 0.197, 5e-4);
  EXPECT_NEAR(approx_wave_number(-2.57, 0.05), 3.2 * std::numbers::pi / 51, 2e-3);
}

TEST(Dispersion, ConvergenceBound) {
  for (double phi : {1e-3, 1e-2}) {
    for (double k = 3 * phi; k <= 0.3; k *= 1.05) {
      const double exact = exact_dispersion(k, phi);
      const double rel = std::abs(exact - approx_dispersion(k, phi)) / std::abs(exact);
      EXPECT_LE(rel, 5 * (k * k + phi * phi / (k * k))) << "phi=" << phi << " k=" << k;
      // The 3% level needs phi^2/k^2 well below 0.03, i.e. k >= 6 phi.
      if (k >= 6 * phi) EXPECT_LT(rel, 0.03) << "phi=" << phi << " k=" << k;
    }
  }
}

TEST(Isoenergy, Asymptote) {
  EXPECT_NEAR(isoenergy_asymptote(-2.57, 0.05), 0.139, 5e-4);
  EXPECT_THROW(isoenergy_asymptote(1.0, 0.05), ConfigError);
}

TEST(Isoenergy, ContourSymmetricAndLabeled) {
  const auto pts = isoenergy_contour(-2.57, 0.05, 1.5, 300);
  ASSERT_FALSE(pts.empty());
  const double h = 1.5 / 300;
  auto has = [&](double kx, double ky) {
    return std::any_of(pts.begin(), pts.end(), [&](const IsoenergyPoint& p) {
      return std::abs(p.kx - kx) < h / 4 && std::abs(p.ky - ky) < h / 4;
    });
  };
  for (const auto& p : pts) {
    EXPECT_TRUE(has(p.ky, p.kx));
    EXPECT_GT(std::min(p.kx, p.ky), isoenergy_asymptote(-2.57, 0.05) - h);
    if (p.ky > 5 * p.kx) EXPECT_EQ(p.group_velocity, Axis::X);
    if (p.kx > 5 * p.ky) EXPECT_EQ(p.group_velocity, Axis::Y);
  }
}

TEST(Isoenergy, EmptyWhenGridTooSmall) {
  EXPECT_TRUE(isoenergy_contour(-2.57, 0.05, 0.1, 50).empty());
  EXPECT_THROW(isoenergy_contour(-2.57, 0.05, 0.1, 0), ConfigError);
}

#pragma once

// Thin LAPACK bindings for the dense eigenproblems used throughout the library.

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include "qls/config.hpp"

extern "C" {
void zgeev_(const char* jobvl, const char* jobvr, const int* n, std::complex<double>* a,
            const int* lda, std::complex<double>* w, std::complex<double>* vl, const int* ldvl,
            std::complex<double>* vr, const int* ldvr, std::complex<double>* work,
            const int* lwork, double* rwork, int* info);
void dsyevd_(const char* jobz, const char* uplo, const int* n, double* a, const int* lda,
             double* w, double* work, const int* lwork, int* iwork, const int* liwork, int* info);
}

namespace qls {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace linalg {

struct GeneralEigen {
  VectorXcd values;
  MatrixXcd vectors;  // right eigenvectors, unit 2-norm columns
};

/// Right eigenpairs of a general complex matrix (LAPACK zgeev).
inline GeneralEigen eig_general(MatrixXcd a) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n) throw ConfigError("eig_general: matrix must be square");
  if (!a.allFinite()) throw ConfigError("eig_general: matrix has non-finite entries");
  GeneralEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  if (n == 0) return out;

  const char jobvl = 'N', jobvr = 'V';
  const int one = 1;
  int lwork = -1, info = 0;
  cplx query;
  std::vector<double> rwork(2 * static_cast<std::size_t>(n));
  zgeev_(&jobvl, &jobvr, &n, a.data(), &n, out.values.data(), nullptr, &one,
         out.vectors.data(), &n, &query, &lwork, rwork.data(), &info);
  lwork = std::max(1, static_cast<int>(query.real()));
  std::vector<cplx> work(static_cast<std::size_t>(lwork));
  zgeev_(&jobvl, &jobvr, &n, a.data(), &n, out.values.data(), nullptr, &one,
         out.vectors.data(), &n, work.data(), &lwork, rwork.data(), &info);
  if (info != 0) {
    throw SolverError("zgeev failed to converge for a " + std::to_string(n) + "x" +
                      std::to_string(n) + " matrix (info=" + std::to_string(info) + ")");
  }
  return out;
}

struct SymmetricEigen {
  VectorXd values;  // ascending
  MatrixXd vectors;
};

/// Eigenpairs of a real symmetric matrix (LAPACK dsyevd); only the lower triangle is read.
inline SymmetricEigen eig_symmetric(MatrixXd a) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n) throw ConfigError("eig_symmetric: matrix must be square");
  SymmetricEigen out;
  out.values.resize(n);
  if (n == 0) return out;

  const char jobz = 'V', uplo = 'L';
  int lwork = -1, liwork = -1, info = 0;
  double wq = 0.0;
  int iwq = 0;
  dsyevd_(&jobz, &uplo, &n, a.data(), &n, out.values.data(), &wq, &lwork, &iwq, &liwork, &info);
  lwork = std::max(1, static_cast<int>(wq));
  liwork = std::max(1, iwq);
  std::vector<double> work(static_cast<std::size_t>(lwork));
  std::vector<int> iwork(static_cast<std::size_t>(liwork));
  dsyevd_(&jobz, &uplo, &n, a.data(), &n, out.values.data(), work.data(), &lwork,
          iwork.data(), &liwork, &info);
  if (info != 0) {
    throw SolverError("dsyevd failed for a " + std::to_string(n) + "x" + std::to_string(n) +
                      " matrix (info=" + std::to_string(info) + ")");
  }
  out.vectors = std::move(a);
  return out;
}

/// Rotate v so its first non-negligible component is real and positive.
template <class Vec>
void fix_phase(Vec&& v, double tol = 1e-12) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > tol * scale) {
      const cplx phase = std::conj(v(i)) / std::abs(v(i));
      v *= phase;
      v(i) = std::abs(v(i));
      return;
    }
  }
}

/// Lexicographic (Re, Im) ordering used for every reported spectrum.
inline bool complex_less(cplx a, cplx b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

/// Permutation sorting eigenpairs by (Re, Im); exact ties fall back to the
/// phase-fixed eigenvector compared componentwise.
inline std::vector<Eigen::Index> sorted_order(const VectorXcd& values, const MatrixXcd& vectors) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    if (values(i) != values(j)) return complex_less(values(i), values(j));
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      if (vectors(r, i) != vectors(r, j)) return complex_less(vectors(r, i), vectors(r, j));
    }
    return false;
  });
  return order;
}

}  // namespace linalg
}  // namespace qls

#pragma once

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>
#include <cblas.h>

#include <algorithm>
#include <string>
#include <vector>

#include "haarcode/common.hpp"

namespace haarcode {

/// Largest |A - A^dagger| entry.
inline double hermiticity_defect(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("matrix must be square");
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the lower triangle is read.
inline Eigen::VectorXd hermitian_eigenvalues(Matrix a) {
  if (a.rows() != a.cols()) throw ShapeError("matrix must be square");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigen::VectorXd w(n);
  if (n == 0) return w;
  // The two-stage reduction is markedly faster for values-only problems.
  lapack_int info = LAPACKE_zheevd_2stage(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data());
  if (info != 0) {
    info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data());
    if (info != 0) throw SolverError("zheevd failed with info=" + std::to_string(info));
  }
  return w;
}

struct HermitianEigen {
  Eigen::VectorXd values;  // ascending
  Matrix vectors;          // columns
};

inline HermitianEigen hermitian_eigensystem(Matrix a) {
  if (a.rows() != a.cols()) throw ShapeError("matrix must be square");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  HermitianEigen out;
  out.values.resize(n);
  if (n > 0) {
    const lapack_int info =
        LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, out.values.data());
    if (info != 0) throw SolverError("zheevd failed with info=" + std::to_string(info));
  }
  out.vectors = std::move(a);
  return out;
}

/// Single-precision variants for large observables. Eigenvalue errors are of
/// order 1e-7 times the spectral norm.
inline Eigen::VectorXd hermitian_eigenvalues_single(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("matrix must be square");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigen::MatrixXcf f = a.cast<std::complex<float>>();
  Eigen::VectorXf w(n);
  if (n == 0) return w.cast<double>();
  lapack_int info = LAPACKE_cheevd_2stage(LAPACK_COL_MAJOR, 'N', 'L', n, f.data(), n, w.data());
  if (info != 0) {
    f = a.cast<std::complex<float>>();
    info = LAPACKE_cheevd(LAPACK_COL_MAJOR, 'N', 'L', n, f.data(), n, w.data());
    if (info != 0) throw SolverError("cheevd failed with info=" + std::to_string(info));
  }
  return w.cast<double>();
}

struct HermitianEigenSingle {
  Eigen::VectorXf values;  // ascending
  Eigen::MatrixXcf vectors;
};

inline HermitianEigenSingle hermitian_eigensystem_single(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("matrix must be square");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  HermitianEigenSingle out;
  out.values.resize(n);
  out.vectors = a.cast<std::complex<float>>();
  if (n > 0) {
    const lapack_int info =
        LAPACKE_cheevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(), n, out.values.data());
    if (info != 0) throw SolverError("cheevd failed with info=" + std::to_string(info));
  }
  return out;
}

/// Dimension from which automatic precision switches to single.
inline constexpr std::size_t kSinglePrecisionDim = std::size_t{1} << 12;

enum class Precision { automatic, double_precision, single_precision };

inline bool use_single(Precision p, std::size_t dim) {
  return p == Precision::single_precision || (p == Precision::automatic && dim >= kSinglePrecisionDim);
}

inline Eigen::VectorXd hermitian_eigenvalues(const Matrix& a, Precision p) {
  return use_single(p, static_cast<std::size_t>(a.rows())) ? hermitian_eigenvalues_single(a)
                                                            : hermitian_eigenvalues(a);
}

/// A^dagger A via zherk. Only the lower triangle is filled unless `full`.
inline Matrix gram(const Matrix& a, bool full = true) {
  const Eigen::Index n = a.cols();
  Matrix g = Matrix::Zero(n, n);
  if (n == 0 || a.rows() == 0) return g;
  cblas_zherk(CblasColMajor, CblasLower, CblasConjTrans, static_cast<int>(n),
              static_cast<int>(a.rows()), 1.0, a.data(), static_cast<int>(a.rows()), 0.0, g.data(),
              static_cast<int>(n));
  if (full) g.template triangularView<Eigen::StrictlyUpper>() = g.adjoint();
  return g;
}

}  // namespace haarcode

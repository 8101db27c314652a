#pragma once

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "haarcode/code_ensemble.hpp"
#include "haarcode/combinatorics.hpp"
#include "haarcode/density.hpp"
#include "haarcode/linalg.hpp"
#include "haarcode/pauli.hpp"

namespace haarcode {

/// Relative cutoff below which eigenvalues are treated as exact zeros.
inline constexpr double kZeroCutoff = 1e-12;

struct Spectrum {
  std::vector<double> values;  // descending, clamped to >= 0
  std::size_t dim = 0;
  double trace = 0.0;

  /// Sorts descending, clamps entries below kZeroCutoff * max to zero, and pads
  /// with zeros up to `ambient_dim` (if larger than the input).
  static Spectrum from_values(std::vector<double> v, std::size_t ambient_dim = 0) {
    Spectrum s;
    std::sort(v.begin(), v.end(), std::greater<>());
    const double top = v.empty() ? 0.0 : std::max(v.front(), 0.0);
    for (double& x : v)
      if (x < kZeroCutoff * top) x = 0.0;
    if (ambient_dim > v.size()) v.resize(ambient_dim, 0.0);
    s.dim = v.size();
    s.trace = 0.0;
    for (double x : v) s.trace += x;
    s.values = std::move(v);
    return s;
  }

  static Spectrum from_values(const Eigen::VectorXd& v, std::size_t ambient_dim = 0) {
    return from_values(std::vector<double>(v.data(), v.data() + v.size()), ambient_dim);
  }

  double max() const { return values.empty() ? 0.0 : values.front(); }

  std::size_t rank(double rel_tol = 1e-10) const {
    const double cut = rel_tol * max();
    return static_cast<std::size_t>(
        std::count_if(values.begin(), values.end(), [cut](double x) { return x > cut; }));
  }
};

/// Hermitian tolerance accepted by spectrum().
inline constexpr double kHermitianTolerance = 1e-8;

inline Spectrum spectrum(const Matrix& rho) {
  if (rho.rows() != rho.cols()) throw ShapeError("spectrum: matrix must be square");
  const double defect = hermiticity_defect(rho);
  if (defect > kHermitianTolerance)
    throw InputError("spectrum: input is not Hermitian (defect " + std::to_string(defect) + ")");
  return Spectrum::from_values(hermitian_eigenvalues(rho));
}

inline Spectrum spectrum(const DensityMatrix& rho) { return spectrum(rho.mat); }

/// max |rho - V diag(lambda) V^dagger|; a diagnostic for the eigensolver.
inline double reconstruction_residual(const Matrix& rho) {
  const HermitianEigen e = hermitian_eigensystem(rho);
  const Matrix r = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
  return (r - rho).cwiseAbs().maxCoeff();
}

/// Renyi entropy of index alpha in base q; alpha = 1 is von Neumann and
/// alpha = kInfinity is the min-entropy. The spectrum is normalized by its trace.
inline double entropy(const Spectrum& s, double alpha, double q = 2.0) {
  if (!(alpha >= 1.0)) throw DomainError("entropy: alpha must be >= 1");
  if (s.trace <= 0) throw DomainError("entropy: spectrum has zero trace");
  const double t = s.trace;
  if (std::isinf(alpha)) return -logq(s.max() / t, q);
  if (alpha == 1.0) {
    double h = 0.0;
    for (double x : s.values)
      if (x > 0) {
        const double y = x / t;
        h -= y * std::log(y);
      }
    return h / std::log(q);
  }
  double acc = 0.0;
  for (double x : s.values)
    if (x > 0) acc += std::pow(x / t, alpha);
  return logq(acc, q) / (1.0 - alpha);
}

/// S_alpha(Q) - S_alpha(RQ).
inline double coherent_information(const Spectrum& spec_q, const Spectrum& spec_rq, double alpha = 1.0,
                                   double q = 2.0) {
  return entropy(spec_q, alpha, q) - entropy(spec_rq, alpha, q);
}

/// Hierarchical weight-band subspaces of an encoded state.
///
/// For RQ, band 0 is span{|Psi>} and band w is the part of span{E_mu |Psi>,
/// |mu| = w} orthogonal to all lower bands. For Q the same construction runs
/// on the codespace: band 0 is span{V|n>}, band w uses E_mu V|n>.
struct BandDecomposition {
  Subsystem subsystem = Subsystem::RQ;
  unsigned q = 2;
  std::size_t dim = 0;
  std::vector<Matrix> bases;  // orthonormal columns, one block per weight
  std::vector<std::size_t> ranks;
  std::size_t residual_rank = 0;

  std::size_t w_max() const { return bases.empty() ? 0 : bases.size() - 1; }
  Matrix projector(std::size_t w) const {
    if (w >= bases.size()) throw DomainError("band index beyond decomposition");
    return bases[w] * bases[w].adjoint();
  }
};

/// Relative singular-value threshold deciding band ranks.
inline constexpr double kBandRankTolerance = 1e-8;

namespace detail {

// Removes the span of the blocks in `prev` from the columns of c (two passes).
inline void project_out(Matrix& c, const std::vector<Matrix>& prev) {
  for (int pass = 0; pass < 2; ++pass)
    for (const Matrix& b : prev)
      if (b.cols() > 0) c.noalias() -= b * (b.adjoint() * c);
}

inline double largest_singular_value(const Matrix& c) {
  const Matrix g = c.rows() <= c.cols() ? Matrix(c * c.adjoint()) : gram(c);
  return std::sqrt(std::max(hermitian_eigenvalues(g).maxCoeff(), 0.0));
}

inline Matrix orthonormal_columns(const Matrix& c) {
  Eigen::HouseholderQR<Matrix> qr(c);
  return qr.householderQ() * Matrix::Identity(c.rows(), c.cols());
}

}  // namespace detail

inline BandDecomposition band_projectors(const EncodedState& psi, std::size_t w_max,
                                         Subsystem subsystem = Subsystem::RQ,
                                         std::size_t max_dim = kMaxDenseDim) {
  const auto& p = psi.params;
  const std::size_t N = static_cast<std::size_t>(p.N);
  if (w_max > N) throw DomainError("band_projectors: w_max exceeds N");
  const Matrix base = subsystem == Subsystem::RQ ? Matrix(psi.amplitudes) : psi.codewords;
  const std::size_t dim = static_cast<std::size_t>(base.rows());
  if (dim > max_dim / 2) throw CapacityError("band_projectors: dimension exceeds budget");
  const std::size_t n_sites = subsystem == Subsystem::RQ ? N + p.k : N;

  BandDecomposition out;
  out.subsystem = subsystem;
  out.q = p.q;
  out.dim = dim;
  std::size_t filled = 0;
  for (std::size_t w = 0; w <= w_max; ++w) {
    if (filled >= dim) {
      out.bases.emplace_back(dim, 0);
      out.ranks.push_back(0);
      continue;
    }
    const std::size_t count = omega_size(p.N, static_cast<int>(w), p.q);
    if (count * base.cols() * dim > max_dim * max_dim * 4)
      throw CapacityError("band_projectors: candidate block too large");
    Matrix cand = corrupted_columns(base, N, n_sites, w, p.q);
    const double scale = detail::largest_singular_value(cand);
    detail::project_out(cand, out.bases);
    Eigen::BDCSVD<Matrix> svd(cand, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    std::size_t r = 0;
    while (r < static_cast<std::size_t>(sv.size()) && sv(r) > kBandRankTolerance * scale) ++r;
    r = std::min(r, dim - filled);
    Matrix basis = svd.matrixU().leftCols(r);
    detail::project_out(basis, out.bases);
    basis = detail::orthonormal_columns(basis);
    out.bases.push_back(std::move(basis));
    out.ranks.push_back(r);
    filled += r;
  }
  out.residual_rank = dim - filled;
  return out;
}

}  // namespace haarcode

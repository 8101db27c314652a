#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "haarcode/density.hpp"
#include "haarcode/linalg.hpp"
#include "haarcode/spectra.hpp"

namespace haarcode {

enum class Protocol { soft, hard };

struct PostselectedState {
  DensityMatrix sigma;
  double acceptance = 1.0;
  Protocol protocol = Protocol::soft;
  double alpha = 1.0;  // soft
  int w = -1;          // hard
};

struct SoftPostselection {
  PostselectedState q;
  std::optional<PostselectedState> rq;
};

/// Tr rho^alpha from a spectrum.
inline double power_trace(const Spectrum& s, double alpha) {
  double acc = 0.0;
  for (double x : s.values)
    if (x > 0) acc += std::pow(x, alpha);
  return acc;
}

inline double acceptance_probability(const Spectrum& s, double alpha) {
  if (!(alpha >= 1.0)) throw DomainError("acceptance_probability: alpha must be >= 1");
  return power_trace(s, alpha);
}

inline double acceptance_probability(const DensityMatrix& rho, double alpha) {
  return acceptance_probability(spectrum(rho), alpha);
}

/// out = (1_R (x) M) rho (1_R (x) M) for an RQ matrix whose code block holds the
/// low-order digits, so 1_R (x) M is block diagonal.
inline Matrix conjugate_block_diagonal(const Matrix& rho, const Matrix& m) {
  const Eigen::Index dq = m.rows();
  const Eigen::Index blocks = rho.rows() / dq;
  if (blocks * dq != rho.rows()) throw ShapeError("RQ matrix is not a multiple of the code dimension");
  Matrix out(rho.rows(), rho.cols());
  Matrix tmp(dq, dq);
  for (Eigen::Index j = 0; j < blocks; ++j)
    for (Eigen::Index i = 0; i < blocks; ++i) {
      tmp.noalias() = m * rho.block(i * dq, j * dq, dq, dq);
      out.block(i * dq, j * dq, dq, dq).noalias() = tmp * m;
    }
  return out;
}

/// Alpha-reweighting POVM element M_alpha = rho_Q^((alpha-1)/2) applied to the
/// decohered state: sigma_Q = rho_Q^alpha / Tr rho_Q^alpha and, if rho_RQ is
/// given, sigma_RQ = (1 (x) M) rho_RQ (1 (x) M) / Tr rho_Q^alpha.
inline SoftPostselection soft_reweight(const DensityMatrix& rho_q, const DensityMatrix* rho_rq,
                                       double alpha) {
  if (!(alpha >= 1.0)) throw DomainError("soft_reweight: alpha must be >= 1");
  SoftPostselection out;
  if (alpha == 1.0) {
    out.q = {rho_q, 1.0, Protocol::soft, 1.0, -1};
    if (rho_rq) out.rq = PostselectedState{*rho_rq, 1.0, Protocol::soft, 1.0, -1};
    return out;
  }
  if (hermiticity_defect(rho_q.mat) > kHermitianTolerance)
    throw InputError("soft_reweight: rho_Q is not Hermitian");
  const HermitianEigen e = hermitian_eigensystem(rho_q.mat);
  const double top = std::max(e.values.maxCoeff(), 0.0);
  Eigen::VectorXd pw(e.values.size()), half(e.values.size());
  double z = 0.0;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    const double x = e.values(i) > kZeroCutoff * top ? e.values(i) : 0.0;
    pw(i) = x > 0 ? std::pow(x, alpha) : 0.0;
    half(i) = x > 0 ? std::pow(x, 0.5 * (alpha - 1.0)) : 0.0;
    z += pw(i);
  }
  if (z <= 0) throw DegeneratePostselection("soft_reweight: zero acceptance");
  Matrix sq = e.vectors * (pw / z).cast<Complex>().asDiagonal() * e.vectors.adjoint();
  out.q = {DensityMatrix(std::move(sq), rho_q.q, rho_q.code_sites, Subsystem::Q), z, Protocol::soft,
           alpha, -1};
  if (rho_rq) {
    const Matrix m = e.vectors * half.cast<Complex>().asDiagonal() * e.vectors.adjoint();
    Matrix srq = conjugate_block_diagonal(rho_rq->mat, m) / z;
    out.rq = PostselectedState{
        DensityMatrix(std::move(srq), rho_rq->q, rho_rq->code_sites, Subsystem::RQ), z,
        Protocol::soft, alpha, -1};
  }
  return out;
}

inline SoftPostselection soft_reweight(const DensityMatrix& rho_q, const DensityMatrix& rho_rq,
                                       double alpha) {
  return soft_reweight(rho_q, &rho_rq, alpha);
}

/// sigma = Pi_w rho Pi_w / Tr(Pi_w rho). Bands built on Q act as 1_R (x) Pi_w
/// on an RQ state.
inline PostselectedState hard_band_postselect(const DensityMatrix& rho, const BandDecomposition& bands,
                                              int w) {
  if (w < 0 || static_cast<std::size_t>(w) > bands.w_max())
    throw DomainError("hard_band_postselect: band index beyond decomposition");
  const Matrix& b = bands.bases[w];
  const Eigen::Index db = static_cast<Eigen::Index>(bands.dim);
  const Eigen::Index d = rho.mat.rows();
  if (d % db != 0) throw ShapeError("hard_band_postselect: state and bands do not match");
  const Eigen::Index blocks = d / db;
  const Eigen::Index r = b.cols();
  // Compress to the band: C = (1 (x) B)^dagger rho (1 (x) B).
  Matrix c(blocks * r, blocks * r);
  for (Eigen::Index j = 0; j < blocks; ++j)
    for (Eigen::Index i = 0; i < blocks; ++i)
      c.block(i * r, j * r, r, r).noalias() =
          b.adjoint() * rho.mat.block(i * db, j * db, db, db) * b;
  const double acc = c.trace().real();
  if (!(acc >= 1e-14)) throw DegeneratePostselection("hard_band_postselect: acceptance below 1e-14");
  Matrix sigma = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < blocks; ++j)
    for (Eigen::Index i = 0; i < blocks; ++i)
      sigma.block(i * db, j * db, db, db).noalias() = b * c.block(i * r, j * r, r, r) * b.adjoint();
  sigma /= acc;
  PostselectedState out;
  out.sigma = DensityMatrix(std::move(sigma), rho.q, rho.code_sites, rho.label);
  out.acceptance = acc;
  out.protocol = Protocol::hard;
  out.alpha = 1.0;
  out.w = w;
  return out;
}

struct HardPostselection {
  PostselectedState q, rq;
};

/// Band postselection of the decohered RQ state. RQ bands project the joint
/// state and sigma_Q is its marginal; Q bands act as 1_R (x) Pi_w on RQ and
/// as Pi_w on the marginal.
inline HardPostselection hard_band_pair(const DensityMatrix& rho_rq, const BandDecomposition& bands, int w) {
  HardPostselection out;
  out.rq = hard_band_postselect(rho_rq, bands, w);
  if (bands.subsystem == Subsystem::RQ) {
    out.q = out.rq;
    out.q.sigma = reduce_to_code(out.rq.sigma);
  } else {
    out.q = hard_band_postselect(reduce_to_code(rho_rq), bands, w);
  }
  return out;
}

/// S(sigma_Q) - S(sigma_RQ) for states produced by the same protocol.
inline double postselected_coherent_info(const PostselectedState& sq, const PostselectedState& srq,
                                         double q = 2.0) {
  if (sq.protocol != srq.protocol || sq.alpha != srq.alpha || sq.w != srq.w)
    throw ProtocolError("postselected_coherent_info: mismatched protocol parameters");
  return entropy(spectrum(sq.sigma), 1.0, q) - entropy(spectrum(srq.sigma), 1.0, q);
}

}  // namespace haarcode

#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "haarcode/common.hpp"

namespace haarcode {

enum class Subsystem { Q, RQ };

inline const char* to_string(Subsystem s) { return s == Subsystem::Q ? "Q" : "RQ"; }

/// A density matrix on `sites` qudits of dimension q. Sites 0..code_sites-1
/// belong to the code block Q; any higher sites are the reference R.
struct DensityMatrix {
  Matrix mat;
  unsigned q = 2;
  std::size_t sites = 0;
  std::size_t code_sites = 0;
  Subsystem label = Subsystem::Q;

  DensityMatrix() = default;
  DensityMatrix(Matrix m, unsigned q_, std::size_t code_sites_, Subsystem label_)
      : mat(std::move(m)), q(q_), code_sites(code_sites_), label(label_) {
    if (mat.rows() != mat.cols()) throw ShapeError("density matrix must be square");
    sites = sites_for_dim(static_cast<std::size_t>(mat.rows()), q);
    if (code_sites > sites) throw ShapeError("code block larger than register");
  }

  std::size_t dim() const { return static_cast<std::size_t>(mat.rows()); }
  Complex trace() const { return mat.trace(); }
};

inline DensityMatrix pure_density(const Vector& psi, unsigned q, std::size_t code_sites,
                                  Subsystem label) {
  return DensityMatrix(psi * psi.adjoint(), q, code_sites, label);
}

namespace detail {

// Offsets of kept/traced digit patterns so that full = kept_off[i] + traced_off[t].
struct SplitOffsets {
  std::vector<std::size_t> kept, traced;
};

inline SplitOffsets split_offsets(std::size_t n_sites, unsigned q, const std::vector<std::size_t>& keep) {
  std::vector<bool> is_kept(n_sites, false);
  for (std::size_t s : keep) {
    if (s >= n_sites) throw DomainError("subsystem selects a site outside the register");
    if (is_kept[s]) throw DomainError("subsystem lists a site twice");
    is_kept[s] = true;
  }
  std::vector<std::size_t> ks, ts;
  for (std::size_t s = 0; s < n_sites; ++s) (is_kept[s] ? ks : ts).push_back(s);
  auto offsets = [q](const std::vector<std::size_t>& group) {
    std::vector<std::size_t> off(ipow(q, group.size()));
    for (std::size_t i = 0; i < off.size(); ++i) {
      std::size_t rest = i, full = 0;
      for (std::size_t s : group) {
        full += (rest % q) * ipow(q, s);
        rest /= q;
      }
      off[i] = full;
    }
    return off;
  };
  // Kept sites keep their relative order, so the output stays little-endian.
  return {offsets(ks), offsets(ts)};
}

}  // namespace detail

/// Partial trace of a density matrix onto the sites in `keep`.
inline Matrix partial_trace(const Matrix& rho, unsigned q, const std::vector<std::size_t>& keep) {
  const std::size_t n = sites_for_dim(static_cast<std::size_t>(rho.rows()), q);
  const auto off = detail::split_offsets(n, q, keep);
  const auto dk = static_cast<Eigen::Index>(off.kept.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index j = 0; j < dk; ++j)
    for (Eigen::Index i = 0; i < dk; ++i) {
      Complex acc = 0;
      for (std::size_t t : off.traced) acc += rho(off.kept[i] + t, off.kept[j] + t);
      out(i, j) = acc;
    }
  return out;
}

/// Reduced density matrix of a pure state onto the sites in `keep`.
inline Matrix partial_trace(const Vector& psi, unsigned q, const std::vector<std::size_t>& keep) {
  const std::size_t n = sites_for_dim(static_cast<std::size_t>(psi.size()), q);
  const auto off = detail::split_offsets(n, q, keep);
  Matrix m(off.kept.size(), off.traced.size());
  for (std::size_t t = 0; t < off.traced.size(); ++t)
    for (std::size_t i = 0; i < off.kept.size(); ++i) m(i, t) = psi(off.kept[i] + off.traced[t]);
  return m * m.adjoint();
}

/// Keeps the code block of a DensityMatrix labelled RQ.
inline DensityMatrix reduce_to_code(const DensityMatrix& rho) {
  std::vector<std::size_t> keep(rho.code_sites);
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
  return DensityMatrix(partial_trace(rho.mat, rho.q, keep), rho.q, rho.code_sites, Subsystem::Q);
}

/// Generic reduce: keep the listed sites of a state vector or density matrix.
inline DensityMatrix reduce(const Vector& psi, unsigned q, const std::vector<std::size_t>& keep) {
  Matrix m = partial_trace(psi, q, keep);
  return DensityMatrix(std::move(m), q, keep.size(), Subsystem::Q);
}

inline DensityMatrix reduce(const DensityMatrix& rho, const std::vector<std::size_t>& keep) {
  Matrix m = partial_trace(rho.mat, rho.q, keep);
  return DensityMatrix(std::move(m), rho.q, keep.size(), Subsystem::Q);
}

}  // namespace haarcode

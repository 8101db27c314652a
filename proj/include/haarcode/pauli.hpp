#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "haarcode/combinatorics.hpp"
#include "haarcode/common.hpp"

namespace haarcode {

// Generalized Pauli operators on qudits of dimension q.
//
// A single-site label v in {0, ..., q^2-1} decodes to (a, b) = (v / q, v % q)
// and denotes X^a Z^b with X|j> = |j+1 mod q> and Z|j> = w^j |j>, w = e^{2 pi i/q}.
// Label 0 is the identity. Basis index digits are little-endian: site i is the
// digit (x / q^i) % q.

struct SiteLabel {
  unsigned a;  // shift power
  unsigned b;  // clock power
};

inline SiteLabel decode_label(unsigned v, unsigned q) { return {v / q, v % q}; }
inline unsigned encode_label(SiteLabel l, unsigned q) { return l.a * q + l.b; }

/// Dense q x q matrix of X^a Z^b.
inline Matrix site_operator(unsigned v, unsigned q) {
  const auto [a, b] = decode_label(v, q);
  Matrix m = Matrix::Zero(q, q);
  for (unsigned j = 0; j < q; ++j) {
    const double angle = 2.0 * std::numbers::pi * double((b * j) % q) / q;
    m((j + a) % q, j) = std::polar(1.0, angle);
  }
  return m;
}

class PauliIndex {
 public:
  PauliIndex() = default;
  PauliIndex(std::vector<unsigned> entries, unsigned q) : entries_(std::move(entries)), q_(q) {
    if (q_ < 2) throw DomainError("PauliIndex: qudit dimension must be >= 2");
    for (unsigned v : entries_)
      if (v >= q_ * q_) throw DomainError("PauliIndex: label out of range");
  }

  static PauliIndex identity(std::size_t n, unsigned q) {
    return PauliIndex(std::vector<unsigned>(n, 0), q);
  }

  std::size_t size() const { return entries_.size(); }
  unsigned q() const { return q_; }
  unsigned operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<unsigned>& entries() const { return entries_; }

  std::size_t weight() const {
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(), [](unsigned v) { return v != 0; }));
  }

  friend bool operator==(const PauliIndex&, const PauliIndex&) = default;
  friend auto operator<=>(const PauliIndex&, const PauliIndex&) = default;

 private:
  std::vector<unsigned> entries_;
  unsigned q_ = 2;
};

/// Action of a Pauli string on basis states: E|x> = phase[x] |target[x]>.
struct ErrorAction {
  std::vector<std::size_t> target;
  std::vector<Complex> phase;
};

/// Identity site map addressing the first n tensor factors.
inline std::vector<std::size_t> default_site_map(std::size_t n) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  return m;
}

/// Builds the permutation/phase action of `mu` on a register of `n_sites`
/// qudits, where mu[i] acts on factor site_map[i].
inline ErrorAction error_action(const PauliIndex& mu, const std::vector<std::size_t>& site_map,
                                std::size_t n_sites) {
  const unsigned q = mu.q();
  if (site_map.size() != mu.size()) throw ShapeError("site map length differs from Pauli index");
  for (std::size_t s : site_map)
    if (s >= n_sites) throw ShapeError("site map addresses a factor outside the register");
  const std::size_t dim = ipow(q, n_sites);
  std::vector<std::size_t> stride(n_sites);
  for (std::size_t s = 0; s < n_sites; ++s) stride[s] = ipow(q, s);

  std::vector<Complex> roots(q);
  for (unsigned j = 0; j < q; ++j) roots[j] = std::polar(1.0, 2.0 * std::numbers::pi * j / q);

  ErrorAction act{std::vector<std::size_t>(dim), std::vector<Complex>(dim)};
  for (std::size_t x = 0; x < dim; ++x) {
    std::size_t y = x;
    unsigned phase_exp = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      if (mu[i] == 0) continue;
      const auto [a, b] = decode_label(mu[i], q);
      const std::size_t st = stride[site_map[i]];
      const unsigned digit = static_cast<unsigned>((x / st) % q);
      phase_exp = (phase_exp + b * digit) % q;
      const unsigned nd = (digit + a) % q;
      y = y - digit * st + nd * st;
    }
    act.target[x] = y;
    act.phase[x] = roots[phase_exp];
  }
  return act;
}

/// E_mu |state>, with mu[i] acting on tensor factor site_map[i].
inline Vector apply_error(const Vector& state, const PauliIndex& mu,
                          const std::vector<std::size_t>& site_map) {
  const std::size_t n = sites_for_dim(static_cast<std::size_t>(state.size()), mu.q());
  const ErrorAction act = error_action(mu, site_map, n);
  Vector out(state.size());
  for (Eigen::Index x = 0; x < state.size(); ++x) out(act.target[x]) = act.phase[x] * state(x);
  return out;
}

inline Vector apply_error(const Vector& state, const PauliIndex& mu) {
  return apply_error(state, mu, default_site_map(mu.size()));
}

/// Applies the action to every column of `m` (m <- E m).
inline void apply_action_columns(const ErrorAction& act, const Matrix& in, Matrix& out) {
  out.resize(in.rows(), in.cols());
  for (Eigen::Index c = 0; c < in.cols(); ++c)
    for (Eigen::Index x = 0; x < in.rows(); ++x) out(act.target[x], c) = act.phase[x] * in(x, c);
}

/// E rho E^dagger.
inline Matrix conjugate_by(const ErrorAction& act, const Matrix& rho) {
  Matrix out(rho.rows(), rho.cols());
  const auto d = rho.rows();
  for (Eigen::Index y = 0; y < d; ++y) {
    const Complex py = std::conj(act.phase[y]);
    const auto ty = static_cast<Eigen::Index>(act.target[y]);
    for (Eigen::Index x = 0; x < d; ++x)
      out(act.target[x], ty) = act.phase[x] * py * rho(x, y);
  }
  return out;
}

/// Dense matrix of a Pauli string on its own register (small sizes only).
inline Matrix pauli_matrix(const PauliIndex& mu) {
  Matrix m = Matrix::Ones(1, 1);
  // Site 0 is the least significant digit, so it is the rightmost Kronecker factor.
  for (std::size_t i = mu.size(); i-- > 0;) {
    const Matrix s = site_operator(mu[i], mu.q());
    Matrix next(m.rows() * s.rows(), m.cols() * s.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        next.block(r * s.rows(), c * s.cols(), s.rows(), s.cols()) = m(r, c) * s;
    m = std::move(next);
  }
  return m;
}

/// All weight-w Pauli strings on N qudits. Order: supports in ascending
/// lexicographic order; within a support, labels ascend lexicographically with
/// the lowest support site most significant.
class FixedWeightRange {
 public:
  FixedWeightRange(std::size_t N, std::size_t w, unsigned q) : N_(N), w_(w), q_(q) {
    if (w > N) throw DomainError("enumerate_fixed_weight: weight exceeds site count");
    if (q < 2) throw DomainError("enumerate_fixed_weight: qudit dimension must be >= 2");
  }

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = PauliIndex;
    using difference_type = std::ptrdiff_t;
    using pointer = const PauliIndex*;
    using reference = const PauliIndex&;

    iterator() = default;
    iterator(std::size_t N, std::size_t w, unsigned q) : N_(N), q_(q), support_(w), values_(w, 1) {
      std::iota(support_.begin(), support_.end(), std::size_t{0});
      done_ = false;
      rebuild();
    }

    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }

    iterator& operator++() {
      advance();
      return *this;
    }
    void operator++(int) { advance(); }

    friend bool operator==(const iterator& a, const iterator& b) { return a.done_ == b.done_; }

   private:
    void rebuild() {
      std::vector<unsigned> e(N_, 0);
      for (std::size_t i = 0; i < support_.size(); ++i) e[support_[i]] = values_[i];
      current_ = PauliIndex(std::move(e), q_);
    }

    void advance() {
      const unsigned top = q_ * q_ - 1;
      for (std::size_t i = values_.size(); i-- > 0;) {
        if (values_[i] < top) {
          ++values_[i];
          rebuild();
          return;
        }
        values_[i] = 1;
      }
      // Next combination in lexicographic order.
      const std::size_t w = support_.size();
      std::size_t i = w;
      while (i-- > 0) {
        if (support_[i] < N_ - w + i) {
          ++support_[i];
          for (std::size_t j = i + 1; j < w; ++j) support_[j] = support_[j - 1] + 1;
          rebuild();
          return;
        }
      }
      done_ = true;
    }

    std::size_t N_ = 0;
    unsigned q_ = 2;
    std::vector<std::size_t> support_;
    std::vector<unsigned> values_;
    PauliIndex current_;
    bool done_ = true;
  };

  iterator begin() const { return iterator(N_, w_, q_); }
  iterator end() const { return iterator(); }

 private:
  std::size_t N_, w_;
  unsigned q_;
};

inline FixedWeightRange enumerate_fixed_weight(std::size_t N, std::size_t w, unsigned q) {
  return FixedWeightRange(N, w, q);
}

inline std::vector<PauliIndex> collect_fixed_weight(std::size_t N, std::size_t w, unsigned q) {
  std::vector<PauliIndex> out;
  for (const auto& mu : enumerate_fixed_weight(N, w, q)) out.push_back(mu);
  return out;
}

/// Columns E_mu b_j for every weight-w mu on sites 0..N-1 of an n_sites
/// register and every column b_j of `base`, ordered mu-major.
inline Matrix corrupted_columns(const Matrix& base, std::size_t N, std::size_t n_sites, std::size_t w,
                                unsigned q) {
  const std::size_t count = omega_size(static_cast<int>(N), static_cast<int>(w), static_cast<int>(q));
  Matrix a(base.rows(), count * base.cols());
  const auto site_map = default_site_map(N);
  Matrix tmp;
  std::size_t col = 0;
  for (const auto& mu : enumerate_fixed_weight(N, w, q)) {
    apply_action_columns(error_action(mu, site_map, n_sites), base, tmp);
    a.middleCols(col, base.cols()) = tmp;
    col += base.cols();
  }
  return a;
}

/// Per-weight coefficient mass, optionally resolved by the logical (R) part.
struct LogicalResolution {
  std::size_t k = 0;
  std::vector<double> phi_identity;  // strings with identity on R, by weight on Q
  std::vector<double> phi_sigma;     // all strings, by weight on Q
};

/// Decomposition rho = q^{-d} sum_S a_S S with a_S = Tr(S^dagger rho).
struct PauliSpectrum {
  unsigned q = 2;
  std::size_t sites = 0;
  /// Indexed by string code sum_i v_i (q^2)^i.
  std::vector<Complex> coefficients;
  /// phi[w] = sum over weight-w strings of |a_S|^2, w = 0..sites.
  std::vector<double> phi;
  std::optional<LogicalResolution> logical;

  Complex coefficient(const PauliIndex& s) const {
    std::size_t code = 0, scale = 1;
    for (std::size_t i = 0; i < s.size(); ++i) {
      code += s[i] * scale;
      scale *= q * q;
    }
    return coefficients.at(code);
  }

  PauliIndex string_of(std::size_t code) const {
    std::vector<unsigned> e(sites);
    for (std::size_t i = 0; i < sites; ++i) {
      e[i] = static_cast<unsigned>(code % (q * q));
      code /= q * q;
    }
    return PauliIndex(std::move(e), q);
  }
};

/// Largest operator (in coefficients) pauli_spectrum will decompose: 4^12.
inline constexpr std::size_t kMaxPauliCoefficients = std::size_t{1} << 24;

namespace detail {

// In-place per-site transform of a q^n x q^n matrix. Afterwards entry (r, c)
// holds Tr(S^dagger rho) for the string whose site-i label is
// (a, b) = (digit_i(r), digit_i(c)).
inline void sitewise_pauli_transform(Matrix& m, unsigned q, std::size_t n) {
  const std::size_t dim = static_cast<std::size_t>(m.rows());
  if (q == 2) {
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t st = std::size_t{1} << s;
      for (std::size_t c0 = 0; c0 < dim; ++c0) {
        if (c0 & st) continue;
        const std::size_t c1 = c0 | st;
        for (std::size_t r0 = 0; r0 < dim; ++r0) {
          if (r0 & st) continue;
          const std::size_t r1 = r0 | st;
          const Complex m00 = m(r0, c0), m01 = m(r0, c1), m10 = m(r1, c0), m11 = m(r1, c1);
          m(r0, c0) = m00 + m11;  // I
          m(r0, c1) = m00 - m11;  // Z
          m(r1, c0) = m10 + m01;  // X
          m(r1, c1) = m10 - m01;  // XZ
        }
      }
    }
    return;
  }
  std::vector<Complex> roots(q);
  for (unsigned j = 0; j < q; ++j) roots[j] = std::polar(1.0, -2.0 * std::numbers::pi * j / q);
  std::vector<Complex> block(q * q), out(q * q);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t st = ipow(q, s);
    for (std::size_t c = 0; c < dim; ++c) {
      if ((c / st) % q != 0) continue;
      for (std::size_t r = 0; r < dim; ++r) {
        if ((r / st) % q != 0) continue;
        for (unsigned x = 0; x < q; ++x)
          for (unsigned y = 0; y < q; ++y) block[x * q + y] = m(r + x * st, c + y * st);
        // coef(a, b) = sum_x w^{-b x} m[x + a][x]
        for (unsigned a = 0; a < q; ++a)
          for (unsigned b = 0; b < q; ++b) {
            Complex acc = 0;
            for (unsigned x = 0; x < q; ++x) acc += roots[(b * x) % q] * block[((x + a) % q) * q + x];
            out[a * q + b] = acc;
          }
        for (unsigned a = 0; a < q; ++a)
          for (unsigned b = 0; b < q; ++b) m(r + a * st, c + b * st) = out[a * q + b];
      }
    }
  }
}

}  // namespace detail

/// Pauli decomposition of a q^d x q^d operator. With `logical_k`, the last k
/// sites are treated as the reference R and the first d-k as the code Q, and
/// the R-resolved weight distributions phi_I and phi_Sigma are filled in.
inline PauliSpectrum pauli_spectrum(const Matrix& rho, unsigned q,
                                    std::optional<std::size_t> logical_k = std::nullopt) {
  if (rho.rows() != rho.cols()) throw ShapeError("pauli_spectrum: matrix must be square");
  const std::size_t d = sites_for_dim(static_cast<std::size_t>(rho.rows()), q);
  const std::size_t dim = static_cast<std::size_t>(rho.rows());
  if (dim * dim > kMaxPauliCoefficients)
    throw CapacityError("pauli_spectrum: more than 4^12 coefficients requested");
  if (logical_k && *logical_k > d) throw DomainError("pauli_spectrum: logical split exceeds sites");

  Matrix m = rho;
  detail::sitewise_pauli_transform(m, q, d);

  PauliSpectrum out;
  out.q = q;
  out.sites = d;
  out.coefficients.assign(dim * dim, Complex{});
  out.phi.assign(d + 1, 0.0);
  const std::size_t nq = logical_k ? d - *logical_k : d;
  if (logical_k) {
    out.logical = LogicalResolution{*logical_k, std::vector<double>(nq + 1, 0.0),
                                    std::vector<double>(nq + 1, 0.0)};
  }

  std::vector<std::size_t> rd(d), cd(d);
  for (std::size_t c = 0; c < dim; ++c) {
    for (std::size_t r = 0; r < dim; ++r) {
      std::size_t code = 0, scale = 1, weight = 0, qweight = 0;
      bool r_identity = true;
      std::size_t rr = r, cc = c;
      for (std::size_t i = 0; i < d; ++i) {
        const unsigned a = static_cast<unsigned>(rr % q), b = static_cast<unsigned>(cc % q);
        rr /= q;
        cc /= q;
        const unsigned v = a * q + b;
        code += v * scale;
        scale *= q * q;
        if (v != 0) {
          ++weight;
          if (i < nq)
            ++qweight;
          else
            r_identity = false;
        }
      }
      const Complex a_s = m(r, c);
      const double mass = std::norm(a_s);
      out.coefficients[code] = a_s;
      out.phi[weight] += mass;
      if (logical_k) {
        out.logical->phi_sigma[qweight] += mass;
        if (r_identity) out.logical->phi_identity[qweight] += mass;
      }
    }
  }
  return out;
}

}  // namespace haarcode

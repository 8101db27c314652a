#pragma once

#include <Eigen/QR>

#include <array>
#include <cstring>
#include <fstream>
#include <string>

#include "haarcode/density.hpp"
#include "haarcode/rng.hpp"

namespace haarcode {

struct CodeParams {
  int N = 1;
  int k = 1;
  unsigned q = 2;
  std::uint64_t seed = 0;

  std::size_t dim_q() const { return ipow(q, static_cast<std::size_t>(N)); }
  std::size_t dim_r() const { return ipow(q, static_cast<std::size_t>(k)); }
  std::size_t dim_rq() const { return ipow(q, static_cast<std::size_t>(N + k)); }

  /// Throws DomainError on bad (N, k, q), CapacityError if q^(N+k) > max_dim.
  void validate(std::size_t max_dim = kMaxDenseDim) const {
    if (q < 2) throw DomainError("qudit dimension must be >= 2");
    if (k < 1 || k > N) throw DomainError("need 1 <= k <= N");
    if (N + k > 62) throw CapacityError("register too large");
    if (dim_rq() > max_dim)
      throw CapacityError("q^(N+k) = " + std::to_string(dim_rq()) + " exceeds the dense budget " +
                          std::to_string(max_dim));
  }
};

/// Stream for the `sample`-th code drawn with these parameters.
inline RandomStream code_stream(const CodeParams& p, std::uint64_t sample) {
  std::uint64_t key = combine_seed(p.seed, static_cast<std::uint64_t>(p.N));
  key = combine_seed(key, static_cast<std::uint64_t>(p.k));
  key = combine_seed(key, p.q);
  return RandomStream(key, sample);
}

/// d x m matrix of iid standard complex normals, filled column by column.
inline Matrix ginibre(std::size_t d, std::size_t m, RandomStream& rng) {
  Matrix g(d, m);
  const double s = 1.0 / std::sqrt(2.0);
  for (std::size_t c = 0; c < m; ++c)
    for (std::size_t r = 0; r < d; ++r) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(r, c) = Complex(re * s, im * s);
    }
  return g;
}

/// First m columns of a Haar unitary on C^d. Uses the QR of a Ginibre matrix
/// with the phases of R's diagonal divided out.
inline Matrix haar_isometry(std::size_t d, std::size_t m, RandomStream& rng) {
  if (d == 0 || m > d) throw DomainError("haar_isometry needs 1 <= m <= d");
  Eigen::HouseholderQR<Matrix> qr(ginibre(d, m, rng));
  Matrix v = qr.householderQ() * Matrix::Identity(d, m);
  const Matrix& r = qr.matrixQR();
  for (std::size_t j = 0; j < m; ++j) {
    const Complex rjj = r(j, j);
    const double a = std::abs(rjj);
    if (a > 0) v.col(j) *= rjj / a;
  }
  return v;
}

inline Matrix haar_unitary(std::size_t d, RandomStream& rng) { return haar_isometry(d, d, rng); }

/// |Psi_RQ> = q^{-k/2} sum_n |n>_R (x) V|n>, where V holds the first q^k
/// columns of the encoding unitary (the images of |n>_L |0>_A).
/// Register layout: Q occupies sites 0..N-1, R sites N..N+k-1, so the basis
/// index is n * q^N + x.
struct EncodedState {
  CodeParams params;
  Vector amplitudes;
  Matrix codewords;  // q^N x q^k, orthonormal columns

  std::size_t rq_sites() const { return static_cast<std::size_t>(params.N + params.k); }

  Matrix rho_q_matrix() const {
    return codewords * codewords.adjoint() / static_cast<double>(params.dim_r());
  }
  DensityMatrix rho_q() const {
    return DensityMatrix(rho_q_matrix(), params.q, params.N, Subsystem::Q);
  }
  DensityMatrix rho_rq() const {
    return DensityMatrix(amplitudes * amplitudes.adjoint(), params.q, params.N, Subsystem::RQ);
  }
  /// Site indices of the code block inside the RQ register.
  std::vector<std::size_t> code_sites() const {
    std::vector<std::size_t> s(params.N);
    for (int i = 0; i < params.N; ++i) s[i] = i;
    return s;
  }
};

inline Vector amplitudes_from_codewords(const Matrix& v) {
  const auto dq = v.rows(), dr = v.cols();
  Vector psi(dq * dr);
  const double s = 1.0 / std::sqrt(static_cast<double>(dr));
  for (Eigen::Index n = 0; n < dr; ++n) psi.segment(n * dq, dq) = v.col(n) * s;
  return psi;
}

inline EncodedState encode(const CodeParams& params, RandomStream& rng,
                           std::size_t max_dim = kMaxDenseDim) {
  params.validate(max_dim);
  EncodedState st;
  st.params = params;
  st.codewords = haar_isometry(params.dim_q(), params.dim_r(), rng);
  st.amplitudes = amplitudes_from_codewords(st.codewords);
  return st;
}

/// Convenience: the `sample`-th code for these parameters.
inline EncodedState encode(const CodeParams& params, std::uint64_t sample,
                           std::size_t max_dim = kMaxDenseDim) {
  RandomStream rng = code_stream(params, sample);
  return encode(params, rng, max_dim);
}

// Binary dump: "HRCS", u32 N, u32 k, u32 q, u64 seed, then q^(N+k) complex
// amplitudes as interleaved little-endian doubles.
inline constexpr std::array<char, 4> kStateMagic{'H', 'R', 'C', 'S'};

namespace detail {
template <class T>
void put_le(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::uint64_t u = 0;
  std::memcpy(&u, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}
template <class T>
T get_le(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw InputError("truncated state dump");
  std::uint64_t u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= std::uint64_t(b[i]) << (8 * i);
  T v;
  std::memcpy(&v, &u, sizeof(T));
  return v;
}
}  // namespace detail

inline void save_state(const EncodedState& st, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open " + path + " for writing");
  os.write(kStateMagic.data(), 4);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(st.params.N));
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(st.params.k));
  detail::put_le<std::uint32_t>(os, st.params.q);
  detail::put_le<std::uint64_t>(os, st.params.seed);
  for (Eigen::Index i = 0; i < st.amplitudes.size(); ++i) {
    detail::put_le<double>(os, st.amplitudes(i).real());
    detail::put_le<double>(os, st.amplitudes(i).imag());
  }
  if (!os) throw InputError("write failed: " + path);
}

inline EncodedState load_state(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open " + path);
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), 4) || magic != kStateMagic) throw InputError("bad magic in " + path);
  EncodedState st;
  st.params.N = static_cast<int>(detail::get_le<std::uint32_t>(is));
  st.params.k = static_cast<int>(detail::get_le<std::uint32_t>(is));
  st.params.q = detail::get_le<std::uint32_t>(is);
  st.params.seed = detail::get_le<std::uint64_t>(is);
  st.params.validate();
  const auto dq = static_cast<Eigen::Index>(st.params.dim_q());
  const auto dr = static_cast<Eigen::Index>(st.params.dim_r());
  st.amplitudes.resize(dq * dr);
  for (Eigen::Index i = 0; i < st.amplitudes.size(); ++i) {
    const double re = detail::get_le<double>(is);
    const double im = detail::get_le<double>(is);
    st.amplitudes(i) = Complex(re, im);
  }
  st.codewords.resize(dq, dr);
  const double s = std::sqrt(static_cast<double>(dr));
  for (Eigen::Index n = 0; n < dr; ++n) st.codewords.col(n) = st.amplitudes.segment(n * dq, dq) * s;
  return st;
}

}  // namespace haarcode

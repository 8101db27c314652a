#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <string>

#include "haarcode/common.hpp"

namespace haarcode {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (int i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

/// Number of weight-w Pauli errors on N qudits, (q^2-1)^w C(N,w).
inline BigInt omega(int N, int w, int q) {
  if (w < 0 || w > N)
    throw DomainError("omega: weight " + std::to_string(w) + " outside [0, " +
                      std::to_string(N) + "]");
  if (q < 2) throw DomainError("omega: qudit dimension must be >= 2");
  BigInt base = q * q - 1;
  return boost::multiprecision::pow(base, static_cast<unsigned>(w)) * binomial(N, w);
}

inline double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Natural log of omega, safe for large N.
inline double log_omega(int N, int w, int q) {
  if (w < 0 || w > N) throw DomainError("log_omega: weight outside [0, N]");
  return w * std::log(q * q - 1.0) + log_binomial(N, w);
}

inline double omega_d(int N, int w, int q) {
  if (N <= 30) return omega(N, w, q).convert_to<double>();
  return std::exp(log_omega(N, w, q));
}

/// Exact value as size_t, throwing CapacityError if it does not fit.
inline std::size_t omega_size(int N, int w, int q) {
  BigInt v = omega(N, w, q);
  if (v > std::numeric_limits<std::size_t>::max())
    throw CapacityError("omega does not fit in size_t");
  return v.convert_to<std::size_t>();
}

}  // namespace haarcode

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>

#include "haarcode/errors.hpp"

namespace haarcode {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Default ceiling on any dense Hilbert-space dimension (2^14).
inline constexpr std::size_t kMaxDenseDim = std::size_t{1} << 14;

/// Integer power with overflow detection.
inline std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && r > std::numeric_limits<std::size_t>::max() / base)
      throw CapacityError("integer power overflows size_t");
    r *= base;
  }
  return r;
}

/// log base q.
inline double logq(double x, double q) { return std::log(x) / std::log(q); }

/// Number of qudits n with q^n == dim, or throws ShapeError.
inline std::size_t sites_for_dim(std::size_t dim, std::size_t q) {
  std::size_t n = 0, d = 1;
  while (d < dim) {
    d *= q;
    ++n;
  }
  if (d != dim) throw ShapeError("dimension is not a power of the qudit dimension");
  return n;
}

}  // namespace haarcode

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "haarcode/channels.hpp"
#include "haarcode/combinatorics.hpp"
#include "haarcode/density.hpp"
#include "haarcode/pauli.hpp"

namespace haarcode {

// ---------------------------------------------------------------------------
// Error-distribution entropies

/// Renyi entropy (base q) of the single-site error distribution
/// {1-p, p/(q^2-1) x (q^2-1)}. alpha = 1 is Shannon, alpha = kInfinity is min-entropy.
inline double shannon_entropy(double p, unsigned q, double alpha = 1.0) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("shannon_entropy: p outside [0, 1]");
  if (!(alpha >= 1.0)) throw DomainError("shannon_entropy: alpha must be >= 1");
  const double m = double(q) * q - 1.0;
  const double e = p / m;
  if (std::isinf(alpha)) return -logq(std::max(1.0 - p, e), q);
  if (alpha == 1.0) {
    double h = 0.0;
    if (p > 0) h -= p * std::log(e);
    if (p < 1) h -= (1.0 - p) * std::log(1.0 - p);
    return h / std::log(double(q));
  }
  return logq(std::pow(1.0 - p, alpha) + m * std::pow(e, alpha), q) / (1.0 - alpha);
}

/// Dominant weight fraction w*/N of the alpha-reweighted error distribution
/// (equal to the effective error rate p_alpha).
inline double w_star_fraction(double p, double alpha, unsigned q) {
  if (!(alpha >= 1.0)) throw DomainError("w_star: alpha must be >= 1");
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("w_star: p outside [0, 1)");
  const double m = double(q) * q - 1.0;
  if (p == 0.0) return 0.0;
  if (std::isinf(alpha)) return (1.0 - p) >= p / m ? 0.0 : 1.0;
  // Ratio of the two terms, computed in log space: m (e/(1-p))^alpha.
  const double log_r = std::log(m) + alpha * (std::log(p / m) - std::log1p(-p));
  return 1.0 / (1.0 + std::exp(-log_r));
}

inline double w_star(double p, double alpha, int N, unsigned q) { return N * w_star_fraction(p, alpha, q); }
inline double p_alpha(double p, double alpha, unsigned q) { return w_star_fraction(p, alpha, q); }

// ---------------------------------------------------------------------------
// Thresholds

enum class ThresholdKind { renyi, postselected, detection };

inline constexpr double kThresholdTolerance = 1e-12;

/// Bisection for a sign change of f on [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double tol = kThresholdTolerance) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0) return lo;
  if (fhi == 0) return hi;
  if ((flo > 0) == (fhi > 0)) throw SolverError("bisect: no sign change in bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Critical error rates.
///  renyi:        root of H_alpha(p) = 1 - k/N              (param = alpha)
///  postselected: root of -x log_q(p/(q^2-1)) - (1-x) log_q(1-p) = 1 - k/N
///                on the branch p >= x                       (param = x = w/N)
///  detection:    1 - q^(r-1) with r = k/N                   (param unused)
inline double threshold_solve(ThresholdKind kind, double param, double k_over_N, unsigned q) {
  if (!(k_over_N >= 0.0 && k_over_N <= 1.0)) throw DomainError("threshold_solve: rate outside [0, 1]");
  const double top = 1.0 - 1.0 / (double(q) * q);
  const double target = 1.0 - k_over_N;
  switch (kind) {
    case ThresholdKind::detection:
      return 1.0 - std::pow(double(q), k_over_N - 1.0);
    case ThresholdKind::renyi: {
      const double alpha = param;
      if (std::isinf(alpha)) return 1.0 - std::pow(double(q), -target);
      return bisect([&](double p) { return shannon_entropy(p, q, alpha) - target; }, 1e-12,
                    top - 1e-12);
    }
    case ThresholdKind::postselected: {
      const double x = param;
      if (!(x >= 0.0 && x < top)) throw DomainError("threshold_solve: w/N outside [0, 1-1/q^2)");
      const double m = double(q) * q - 1.0;
      auto f = [&](double p) {
        return (-x * std::log(p / m) - (1.0 - x) * std::log1p(-p)) / std::log(double(q)) - target;
      };
      return bisect(f, std::max(x, 1e-12), top - 1e-12);
    }
  }
  throw DomainError("threshold_solve: unknown kind");
}

inline double hashing_threshold(double k_over_N, unsigned q) {
  return threshold_solve(ThresholdKind::renyi, 1.0, k_over_N, q);
}

// ---------------------------------------------------------------------------
// Leading-order entropies and coherent information

/// k below the hashing bound, -k far above it, N(1 - H(p)) in between.
inline double coherent_info_leading(double p, int N, int k, unsigned q, double alpha = 1.0) {
  const double h = shannon_entropy(p, q, alpha);
  const double r = double(k) / N;
  if (h <= 1.0 - r) return k;
  if (h >= 1.0 + r) return -k;
  return N * (1.0 - h);
}

inline double renyi_entropy_leading(double p, double alpha, int N, int k, unsigned q, Subsystem sub) {
  const double nh = N * shannon_entropy(p, q, alpha);
  return sub == Subsystem::Q ? std::min(k + nh, double(N)) : std::min(nh, double(N + k));
}

/// Von Neumann entropy of the alpha-reweighted code state at leading order.
inline double reweighted_vn_leading(double p, double alpha, int N, int k, unsigned q) {
  const double pc = threshold_solve(ThresholdKind::renyi, alpha, double(k) / N, q);
  if (p >= pc) return N;
  return std::min(N * shannon_entropy(w_star_fraction(p, alpha, q), q, 1.0) + k, double(N));
}

// ---------------------------------------------------------------------------
// Marchenko-Pastur

/// Support of the unit-mean law for dimension ratio c. For c >= 1 this is
/// (1 -+ c^{-1/2})^2; c and 1/c share the same nonzero-eigenvalue law.
inline std::pair<double, double> mp_edges(double c) {
  if (!(c > 0)) throw DomainError("mp_edges: c must be positive");
  const double y = std::min(c, 1.0 / c);
  const double s = std::sqrt(y);
  return {(1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s)};
}

/// Unit-mean density of nonzero eigenvalues; integrates to 1 for any c.
inline double mp_density(double c, double x) {
  const auto [lo, hi] = mp_edges(c);
  if (x <= lo || x >= hi || x <= 0) return 0.0;
  const double y = std::min(c, 1.0 / c);
  return std::sqrt((hi - x) * (x - lo)) / (2.0 * std::numbers::pi * y * x);
}

/// Tabulated cumulative distribution of mp_density.
class MarchenkoPastur {
 public:
  explicit MarchenkoPastur(double c, std::size_t n = 4096) : c_(c) {
    std::tie(lo_, hi_) = mp_edges(c);
    // x = lo + (hi-lo)(1 - cos t)/2 removes the square-root edges.
    const double h = (hi_ - lo_) / 2.0;
    const double y = std::min(c, 1.0 / c);
    x_.resize(n + 1);
    cdf_.resize(n + 1);
    auto integrand = [&](double t) {
      const double x = lo_ + h * (1.0 - std::cos(t));
      const double s = std::sin(t);
      return x > 0 ? h * h * s * s / (2.0 * std::numbers::pi * y * x) : 0.0;
    };
    const double dt = std::numbers::pi / n;
    cdf_[0] = 0.0;
    x_[0] = lo_;
    for (std::size_t i = 1; i <= n; ++i) {
      const double a = (i - 1) * dt, b = i * dt;
      // Simpson on each panel.
      cdf_[i] = cdf_[i - 1] + dt / 6.0 * (integrand(a) + 4.0 * integrand(0.5 * (a + b)) + integrand(b));
      x_[i] = lo_ + h * (1.0 - std::cos(b));
    }
    total_ = cdf_.back();
  }

  double c() const { return c_; }
  double lower() const { return lo_; }
  double upper() const { return hi_; }
  double density(double x) const { return mp_density(c_, x); }
  /// Raw integral of the density over the support (1 up to quadrature error).
  double total() const { return total_; }

  double cdf(double x) const {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return 1.0;
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin());
    const double f = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return (cdf_[i - 1] + f * (cdf_[i] - cdf_[i - 1])) / total_;
  }

 private:
  double c_, lo_ = 0, hi_ = 0, total_ = 1;
  std::vector<double> x_, cdf_;
};

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
inline double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DomainError("ks_distance: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, f - i / n, (i + 1) / n - f});
  }
  return d;
}

// ---------------------------------------------------------------------------
// Critical weights and band models

/// Smallest w with sum_{w' <= w} Omega(w') >= q^(N+k) (RQ) or q^(N-k) (Q).
inline int critical_weight(int N, int k, unsigned q, Subsystem sub) {
  const BigInt target = boost::multiprecision::pow(BigInt(q), static_cast<unsigned>(sub == Subsystem::RQ ? N + k : N - k));
  BigInt acc = 0;
  for (int w = 0; w <= N; ++w) {
    acc += omega(N, w, static_cast<int>(q));
    if (acc >= target) return w;
  }
  return N;
}

struct BandRecord {
  int w = 0;
  double multiplicity = 0;  // Omega(w) (RQ) or q^k Omega(w) (Q)
  double mean = 0;          // mean eigenvalue
  double c = 0;             // MP ratio: Hilbert dimension over multiplicity
  double width = 0;         // MP support width of the band
  double shift = 0;         // rigid shift relative to P_w x the microcanonical band
  double weight_prob = 0;   // P_w
};

struct BandModel {
  Subsystem subsystem = Subsystem::Q;
  int N = 0, k = 0;
  unsigned q = 2;
  double p = 0;
  std::vector<BandRecord> bands;
  /// Partially filled band at the critical weight; multiplicity 0 if absent.
  BandRecord reservoir;

  double total_mass() const {
    double t = reservoir.multiplicity * reservoir.mean;
    for (const auto& b : bands) t += b.multiplicity * b.mean;
    return t;
  }
  double dimension() const {
    return std::pow(double(q), subsystem == Subsystem::RQ ? N + k : N);
  }
};

namespace detail {

inline double band_multiplicity(int N, int k, unsigned q, int w, Subsystem sub) {
  const double om = omega_d(N, w, static_cast<int>(q));
  return sub == Subsystem::RQ ? om : om * std::pow(double(q), k);
}

// The w = 0 band is spanned by orthonormal codewords, so its microcanonical
// law is a point mass rather than Marchenko-Pastur.
inline void fill_shape(BandRecord& b, double dim) {
  b.c = dim / b.multiplicity;
  b.width = b.multiplicity > 0 && b.w > 0 ? 4.0 * b.weight_prob / b.multiplicity * std::sqrt(std::min(b.multiplicity / dim, dim / b.multiplicity)) : 0.0;
  b.shift = b.mean - (b.multiplicity > 0 ? b.weight_prob / b.multiplicity : 0.0);
}

}  // namespace detail

/// Every weight w = 0..N as a degenerate band of P_w / multiplicity. No
/// dimension counting, so multiplicities may exceed the Hilbert space.
inline BandModel zeroth_order_bands(double p, int N, int k, unsigned q, Subsystem sub) {
  BandModel m{sub, N, k, q, p, {}, {}};
  const double dim = m.dimension();
  for (int w = 0; w <= N; ++w) {
    BandRecord b;
    b.w = w;
    b.weight_prob = weight_probability(N, w, p);
    b.multiplicity = detail::band_multiplicity(N, k, q, w, sub);
    b.mean = b.weight_prob / b.multiplicity;
    detail::fill_shape(b, dim);
    b.shift = 0.0;
    m.bands.push_back(b);
  }
  return m;
}

/// Bands w < w_c with first-order level repulsion from lower bands and
/// attraction from higher ones, plus the reservoir at w_c holding the rest of
/// the Hilbert space with mean P(w >= w_c) / dim.
inline BandModel mean_shift_bands(double p, int N, int k, unsigned q, Subsystem sub) {
  BandModel m{sub, N, k, q, p, {}, {}};
  const double dim = m.dimension();
  const int wc = critical_weight(N, k, q, sub);
  std::vector<double> P(N + 1);
  for (int w = 0; w <= N; ++w) P[w] = weight_probability(N, w, p);
  std::vector<double> tail(N + 2, 0.0);  // tail[w] = sum_{w' >= w} P_w'
  for (int w = N; w >= 0; --w) tail[w] = tail[w + 1] + P[w];

  double below = 0.0;  // states in lower bands
  for (int w = 0; w < wc; ++w) {
    BandRecord b;
    b.w = w;
    b.weight_prob = P[w];
    b.multiplicity = detail::band_multiplicity(N, k, q, w, sub);
    b.mean = P[w] / b.multiplicity * (1.0 - below / dim) + tail[w + 1] / dim;
    detail::fill_shape(b, dim);
    m.bands.push_back(b);
    below += b.multiplicity;
  }
  BandRecord& r = m.reservoir;
  r.w = wc;
  r.weight_prob = tail[wc];
  r.multiplicity = dim - below;
  r.mean = tail[wc] / dim;
  detail::fill_shape(r, dim);
  return m;
}

/// Normalized density of one band: P_w times the microcanonical MP band,
/// rigidly shifted to the band mean.
inline double band_model_density(const BandRecord& b, double lambda) {
  if (b.weight_prob <= 0 || b.multiplicity <= 0 || b.w == 0) return 0.0;
  const double scale = b.multiplicity / b.weight_prob;
  return scale * mp_density(b.c, (lambda - b.shift) * scale);
}

inline std::function<double(double)> band_model_cdf(const BandRecord& b) {
  if (b.w == 0) {
    const double at = b.mean;
    return [at](double lambda) { return lambda < at ? 0.0 : 1.0; };
  }
  auto mp = std::make_shared<MarchenkoPastur>(b.c);
  const double scale = b.multiplicity / b.weight_prob;
  const double shift = b.shift;
  return [mp, scale, shift](double lambda) { return mp->cdf((lambda - shift) * scale); };
}

// ---------------------------------------------------------------------------
// Weight enumerators

/// A(u) = sum_w phi_I(w) u^w and B(u) = sum_w phi_Sigma(w) u^w, either from a
/// sampled code (numeric) or from the Haar average (analytic).
class EnumeratorPair {
 public:
  static EnumeratorPair numeric(const LogicalResolution& lr, int N, int k, unsigned q) {
    EnumeratorPair e;
    e.N_ = N;
    e.k_ = k;
    e.q_ = q;
    e.phi_a_ = lr.phi_identity;
    e.phi_b_ = lr.phi_sigma;
    e.analytic_ = false;
    return e;
  }

  /// From the Pauli decomposition of |Psi><Psi| on RQ.
  static EnumeratorPair numeric(const EncodedState& psi) {
    const auto spec = pauli_spectrum(psi.rho_rq().mat, psi.params.q, static_cast<std::size_t>(psi.params.k));
    return numeric(*spec.logical, psi.params.N, psi.params.k, psi.params.q);
  }

  static EnumeratorPair haar(int N, int k, unsigned q) {
    if (k < 0 || k > N || q < 2) throw DomainError("enumerator_haar: invalid parameters");
    EnumeratorPair e;
    e.N_ = N;
    e.k_ = k;
    e.q_ = q;
    e.analytic_ = true;
    const double qd = q;
    e.a_ = (std::pow(qd, N - k) - 1.0) / (std::pow(qd, 2 * N) - 1.0);
    return e;
  }

  double A(double u) const {
    if (analytic_) return 1.0 - a_ + a_ * std::pow(1.0 + (double(q_) * q_ - 1.0) * u, N_);
    return horner(phi_a_, u);
  }
  double B(double u) const {
    if (analytic_)
      return std::pow(double(q_), N_ + k_) * a_ +
             std::pow(double(q_), k_ - N_) * (1.0 - a_) * std::pow(1.0 + (double(q_) * q_ - 1.0) * u, N_);
    return horner(phi_b_, u);
  }

  int N() const { return N_; }
  int k() const { return k_; }
  unsigned q() const { return q_; }
  bool analytic() const { return analytic_; }
  double a() const { return a_; }

 private:
  static double horner(const std::vector<double>& c, double u) {
    double r = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) r = r * u + c[i];
    return r;
  }

  int N_ = 0, k_ = 0;
  unsigned q_ = 2;
  bool analytic_ = true;
  double a_ = 0.0;
  std::vector<double> phi_a_, phi_b_;
};

inline EnumeratorPair enumerator_haar(int N, int k, unsigned q) { return EnumeratorPair::haar(N, k, q); }

/// u = p / ((q^2-1)(1-p)): the per-error odds that enter the enumerators.
inline double u_from_p(double p, unsigned q) { return p / ((double(q) * q - 1.0) * (1.0 - p)); }

struct MacWilliamsResiduals {
  double transform;  // A((1-u)/(1+(q^2-1)u)) - q^(N-k) (1+(q^2-1)u)^(-N) B(u)
  double crossing;   // A(u*) - q^(-k) B(u*), u* = 1/(q+1)
};

inline MacWilliamsResiduals macwilliams_check(const EnumeratorPair& e, double u) {
  const double qd = e.q();
  const double s = 1.0 + (qd * qd - 1.0) * u;
  const double r1 = e.A((1.0 - u) / s) - std::pow(qd, e.N() - e.k()) * std::pow(s, -e.N()) * e.B(u);
  const double us = 1.0 / (qd + 1.0);
  const double r2 = e.A(us) - std::pow(qd, -e.k()) * e.B(us);
  return {r1, r2};
}

/// Failure probability after postselecting on no detected error.
inline double postselect_failure(const EnumeratorPair& e, double u) {
  const double qk = std::pow(double(e.q()), e.k());
  const double b = e.B(u);
  if (b == 0.0) throw DomainError("postselect_failure: B(u) = 0");
  return qk / (qk + 1.0) * (1.0 - e.A(u) / b);
}

struct Renyi2 {
  double s2_q;
  double s2_rq;
  double ic2;
};

/// Renyi-2 entropies of the depolarized code state from the enumerators:
/// Tr rho_Q^2 = q^-N A((1-gamma)^2) and Tr rho_RQ^2 = q^-(N+k) B((1-gamma)^2).
inline Renyi2 renyi2_from_enumerators(const EnumeratorPair& e, double gamma) {
  const double qq = double(e.q()) * e.q();
  if (!(gamma >= 0.0 && gamma <= qq / (qq - 1.0))) throw DomainError("renyi2: gamma outside [0, q^2/(q^2-1)]");
  const double x = (1.0 - gamma) * (1.0 - gamma);
  const double qd = e.q();
  const double s2q = e.N() - logq(e.A(x), qd);
  const double s2rq = e.N() + e.k() - logq(e.B(x), qd);
  return {s2q, s2rq, s2q - s2rq};
}

/// gamma at which the analytic Renyi-2 coherent information vanishes.
inline double renyi2_crossing_gamma(unsigned q) { return 1.0 - 1.0 / std::sqrt(double(q) + 1.0); }

}  // namespace haarcode

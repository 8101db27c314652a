#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "haarcode/code_ensemble.hpp"
#include "haarcode/combinatorics.hpp"
#include "haarcode/density.hpp"
#include "haarcode/linalg.hpp"
#include "haarcode/pauli.hpp"
#include "haarcode/spectra.hpp"

namespace haarcode {

/// gamma = q^2 p / (q^2 - 1).
inline double gamma_from_p(double p, unsigned q) { return double(q) * q * p / (double(q) * q - 1.0); }
inline double p_from_gamma(double gamma, unsigned q) {
  return (double(q) * q - 1.0) * gamma / (double(q) * q);
}

enum class ChannelKind { depolarizing, dual, fixed_weight };

struct ChannelSpec {
  ChannelKind kind = ChannelKind::depolarizing;
  double p = 0.0;
  double gamma = 0.0;
  std::size_t w = 0;

  static ChannelSpec depolarizing(double p, unsigned q) {
    return {ChannelKind::depolarizing, p, gamma_from_p(p, q), 0};
  }
  static ChannelSpec dual(double gamma, unsigned q) {
    return {ChannelKind::dual, p_from_gamma(gamma, q), gamma, 0};
  }
  static ChannelSpec fixed_weight(std::size_t w) { return {ChannelKind::fixed_weight, 0, 0, w}; }
};

/// In place: X <- alpha X + beta (Tr_site X) (x) 1/q on one site of the register.
inline void site_mix(Matrix& x, unsigned q, std::size_t site, double alpha, double beta) {
  const std::size_t dim = static_cast<std::size_t>(x.rows());
  const std::size_t st = ipow(q, site);
  if (st >= dim) throw DomainError("site outside the register");
  const double bq = beta / q;
  if (q == 2) {
    for (std::size_t c0 = 0; c0 < dim; ++c0) {
      if (c0 & st) continue;
      const std::size_t c1 = c0 | st;
      for (std::size_t r0 = 0; r0 < dim; ++r0) {
        if (r0 & st) continue;
        const std::size_t r1 = r0 | st;
        const Complex t = bq * (x(r0, c0) + x(r1, c1));
        x(r0, c0) = alpha * x(r0, c0) + t;
        x(r1, c1) = alpha * x(r1, c1) + t;
        x(r0, c1) *= alpha;
        x(r1, c0) *= alpha;
      }
    }
    return;
  }
  for (std::size_t c0 = 0; c0 < dim; ++c0) {
    if ((c0 / st) % q != 0) continue;
    for (std::size_t r0 = 0; r0 < dim; ++r0) {
      if ((r0 / st) % q != 0) continue;
      Complex t = 0;
      for (unsigned j = 0; j < q; ++j) t += x(r0 + j * st, c0 + j * st);
      t *= bq;
      for (unsigned b = 0; b < q; ++b)
        for (unsigned a = 0; a < q; ++a) {
          Complex& e = x(r0 + a * st, c0 + b * st);
          e = alpha * e + (a == b ? t : Complex{});
        }
    }
  }
}

namespace detail {

inline void check_code_sites(const DensityMatrix& rho, const std::vector<std::size_t>& sites) {
  for (std::size_t s : sites)
    if (s >= rho.code_sites)
      throw DomainError("site " + std::to_string(s) + " is not a code site");
}

inline std::vector<std::size_t> all_code_sites(const DensityMatrix& rho) {
  return default_site_map(rho.code_sites);
}

}  // namespace detail

/// (1 - gamma) rho + gamma Tr_i[rho] (x) 1/q on each listed site.
inline DensityMatrix depolarize_dual(DensityMatrix rho, double gamma,
                                     const std::vector<std::size_t>& sites) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("depolarize_dual: gamma outside [0, 1]");
  detail::check_code_sites(rho, sites);
  if (gamma == 0.0) return rho;
  for (std::size_t s : sites) site_mix(rho.mat, rho.q, s, 1.0 - gamma, gamma);
  return rho;
}

inline DensityMatrix depolarize_dual(DensityMatrix rho, double gamma) {
  const auto sites = detail::all_code_sites(rho);
  return depolarize_dual(std::move(rho), gamma, sites);
}

/// Single-site depolarizing noise (1-p) rho + p/(q^2-1) sum_{mu != 0} E rho E^dagger
/// on each listed site.
inline DensityMatrix depolarize(DensityMatrix rho, double p, const std::vector<std::size_t>& sites) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("depolarize: p outside [0, 1]");
  detail::check_code_sites(rho, sites);
  if (p == 0.0) return rho;
  const double g = gamma_from_p(p, rho.q);
  for (std::size_t s : sites) site_mix(rho.mat, rho.q, s, 1.0 - g, g);
  return rho;
}

inline DensityMatrix depolarize(DensityMatrix rho, double p) {
  const auto sites = detail::all_code_sites(rho);
  return depolarize(std::move(rho), p, sites);
}

/// P_w = C(N, w) p^w (1-p)^(N-w).
inline double weight_probability(int N, int w, double p) {
  if (w < 0 || w > N) throw DomainError("weight_probability: weight outside [0, N]");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("weight_probability: p outside [0, 1]");
  return binomial(N, w).convert_to<double>() * std::pow(p, w) * std::pow(1.0 - p, N - w);
}

/// Default memory budget for dense channel work (bytes).
inline constexpr std::size_t kDefaultBudgetBytes = std::size_t{3} << 30;

/// Uniform average over all weight-w Pauli errors on the code sites.
///
/// Computed site by site: with D_i(X) = sum_{mu_i != 0} E X E^dagger =
/// q Tr_i[X] (x) 1 - X, the sum over weight-w strings is the degree-w part of
/// prod_i (1 + t D_i), accumulated in w+1 matrices.
inline DensityMatrix fixed_weight_apply(const DensityMatrix& rho, std::size_t w,
                                        std::size_t budget_bytes = kDefaultBudgetBytes) {
  const std::size_t N = rho.code_sites;
  if (w > N) throw DomainError("fixed_weight_apply: weight exceeds the number of code sites");
  if (w == 0) return rho;
  const std::size_t bytes = (w + 2) * rho.dim() * rho.dim() * sizeof(Complex);
  if (bytes > budget_bytes)
    throw CapacityError("fixed_weight_apply needs " + std::to_string(bytes >> 20) +
                        " MiB; use fixed_weight_spectrum instead");
  const double qq = double(rho.q) * rho.q;
  std::vector<Matrix> c(w + 1);
  c[0] = rho.mat;
  Matrix tmp;
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t top = std::min(w, i + 1);
    for (std::size_t j = top; j >= 1; --j) {
      if (c[j - 1].size() == 0) continue;
      tmp = c[j - 1];
      site_mix(tmp, rho.q, i, -1.0, qq);
      if (c[j].size() == 0)
        c[j] = std::move(tmp);
      else
        c[j] += tmp;
    }
  }
  DensityMatrix out = rho;
  out.mat = c[w] / omega_d(static_cast<int>(N), static_cast<int>(w), static_cast<int>(rho.q));
  return out;
}

enum class SpectrumMethod { automatic, gram, dense };

/// Spectrum of the fixed-weight channel output on RQ or Q for one code.
///
/// RQ: the output is A A^dagger with columns E_mu|Psi>/sqrt(Omega); Q: columns
/// E_mu V|n>/sqrt(q^k Omega). When there are fewer columns than the Hilbert
/// dimension the Gram matrix A^dagger A is diagonalized instead. Zeros pad the
/// result to the full dimension.
inline Spectrum fixed_weight_spectrum(const EncodedState& psi, std::size_t w, Subsystem sub,
                                      SpectrumMethod method = SpectrumMethod::automatic,
                                      std::size_t budget_bytes = kDefaultBudgetBytes,
                                      Precision precision = Precision::automatic) {
  const auto& p = psi.params;
  const std::size_t N = static_cast<std::size_t>(p.N);
  if (w > N) throw DomainError("fixed_weight_spectrum: weight exceeds N");
  const bool rq = sub == Subsystem::RQ;
  const std::size_t dim = rq ? p.dim_rq() : p.dim_q();
  const double om = omega_d(p.N, static_cast<int>(w), static_cast<int>(p.q));
  const double cols = rq ? om : om * static_cast<double>(p.dim_r());
  if (method == SpectrumMethod::automatic)
    method = cols < static_cast<double>(dim) ? SpectrumMethod::gram : SpectrumMethod::dense;

  if (method == SpectrumMethod::gram) {
    const double bytes = cols * (cols + static_cast<double>(dim)) * sizeof(Complex);
    if (bytes > static_cast<double>(budget_bytes) || cols > static_cast<double>(kMaxDenseDim))
      throw CapacityError("fixed_weight_spectrum: Gram matrix exceeds budget");
    const Matrix base = rq ? Matrix(psi.amplitudes) : psi.codewords;
    Matrix a = corrupted_columns(base, N, rq ? N + p.k : N, w, p.q);
    a /= std::sqrt(cols);
    const Matrix g = gram(a, false);
    a.resize(0, 0);
    return Spectrum::from_values(hermitian_eigenvalues(g, precision), dim);
  }
  const DensityMatrix rho = rq ? psi.rho_rq() : psi.rho_q();
  const DensityMatrix out = fixed_weight_apply(rho, w, budget_bytes);
  return Spectrum::from_values(hermitian_eigenvalues(out.mat, precision), dim);
}

/// Brute-force sum_mu P(mu) E_mu rho E_mu^dagger over every Pauli string on the
/// code sites. Test oracle; limited to 5 code sites.
inline DensityMatrix convex_sum_oracle(const DensityMatrix& rho, double p) {
  const std::size_t N = rho.code_sites;
  if (N > 5) throw CapacityError("convex_sum_oracle is limited to N <= 5");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("convex_sum_oracle: p outside [0, 1]");
  const double qq = double(rho.q) * rho.q;
  const auto site_map = default_site_map(N);
  Matrix acc = Matrix::Zero(rho.dim(), rho.dim());
  for (std::size_t w = 0; w <= N; ++w) {
    const double pw = std::pow(p / (qq - 1.0), double(w)) * std::pow(1.0 - p, double(N - w));
    if (pw == 0.0) continue;
    for (const auto& mu : enumerate_fixed_weight(N, w, rho.q))
      acc += pw * conjugate_by(error_action(mu, site_map, rho.sites), rho.mat);
  }
  DensityMatrix out = rho;
  out.mat = std::move(acc);
  return out;
}

/// Tr[rho N_p(rho)].
inline double average_fidelity(const DensityMatrix& rho, double p) {
  const DensityMatrix n = depolarize(rho, p);
  return rho.mat.transpose().cwiseProduct(n.mat).sum().real();
}

}  // namespace haarcode

#pragma once

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "haarcode/ansatz.hpp"
#include "haarcode/channels.hpp"
#include "haarcode/code_ensemble.hpp"
#include "haarcode/postselection.hpp"
#include "haarcode/spectra.hpp"

namespace haarcode {

inline constexpr const char* kVersion = "0.3.0";

// ---------------------------------------------------------------------------
// Parallel loop

/// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
/// thrown by any worker is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr err;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned t = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  for (unsigned i = 0; i < t; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

// ---------------------------------------------------------------------------
// Statistics

struct MeanErr {
  double mean = 0;
  double stderr_ = 0;
};

inline MeanErr mean_stderr(const std::vector<double>& x) {
  MeanErr r;
  if (x.empty()) return r;
  double s = 0;
  for (double v : x) s += v;
  r.mean = s / x.size();
  if (x.size() < 2) return r;
  double ss = 0;
  for (double v : x) ss += (v - r.mean) * (v - r.mean);
  r.stderr_ = std::sqrt(ss / (x.size() - 1) / x.size());
  return r;
}

/// "%.12g" formatting used in every CSV.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Per-sample observables of the depolarized code

struct Observables {
  double alpha = 1;
  double ic = 0;      // S(sigma_Q) - S(sigma_RQ)
  double s1q = 0;     // von Neumann entropy of sigma_Q
  double s1rq = 0;    // von Neumann entropy of sigma_RQ
  double s2q = 0;     // Renyi-2 entropy of sigma_Q
  double accept = 1;  // Tr rho_Q^alpha
};

/// Depolarizes one code at rate p and evaluates the observables for every
/// alpha (alpha = 1 means no postselection).
namespace detail {

inline Spectrum spectrum_at(const Matrix& m, bool single) {
  if (!single) return spectrum(m);
  return Spectrum::from_values(hermitian_eigenvalues(m, Precision::single_precision));
}

// Spectra of sigma_Q and sigma_RQ for one alpha > 1. sigma_Q comes straight
// from the eigenvalues of rho_Q.
inline std::pair<Spectrum, Spectrum> reweighted_spectra(const DensityMatrix& dq, const DensityMatrix& rq,
                                                        double alpha, bool single, double& accept) {
  Eigen::VectorXd vals;
  Matrix vecs;
  Eigen::MatrixXcf vecs_f;
  if (single) {
    auto e = hermitian_eigensystem_single(dq.mat);
    vals = e.values.cast<double>();
    vecs_f = std::move(e.vectors);
  } else {
    auto e = hermitian_eigensystem(dq.mat);
    vals = std::move(e.values);
    vecs = std::move(e.vectors);
  }
  const double top = std::max(vals.maxCoeff(), 0.0);
  const Eigen::Index n = vals.size();
  std::vector<double> pw(n);
  Eigen::VectorXd half(n);
  double z = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = vals(i) > kZeroCutoff * top ? vals(i) : 0.0;
    pw[i] = x > 0 ? std::pow(x, alpha) : 0.0;
    half(i) = x > 0 ? std::pow(x, 0.5 * (alpha - 1.0)) : 0.0;
    z += pw[i];
  }
  if (z <= 0) throw DegeneratePostselection("observe: zero acceptance");
  for (double& x : pw) x /= z;
  accept = z;
  Spectrum sq = Spectrum::from_values(std::move(pw));
  if (!single) {
    const Matrix m = vecs * half.cast<Complex>().asDiagonal() * vecs.adjoint();
    return {sq, spectrum(Matrix(conjugate_block_diagonal(rq.mat, m) / z))};
  }
  using MatF = Eigen::MatrixXcf;
  const MatF m = vecs_f * half.cast<std::complex<float>>().asDiagonal() * vecs_f.adjoint();
  const Eigen::Index dq_ = m.rows(), blocks = rq.mat.rows() / dq_;
  MatF big(rq.mat.rows(), rq.mat.cols()), tmp(dq_, dq_);
  const float inv = static_cast<float>(1.0 / z);
  for (Eigen::Index j = 0; j < blocks; ++j)
    for (Eigen::Index i = j; i < blocks; ++i) {  // lower blocks only; the solver reads 'L'
      tmp.noalias() = m * rq.mat.block(i * dq_, j * dq_, dq_, dq_).cast<std::complex<float>>();
      big.block(i * dq_, j * dq_, dq_, dq_).noalias() = inv * (tmp * m);
    }
  const lapack_int nn = static_cast<lapack_int>(big.rows());
  Eigen::VectorXf w(nn);
  lapack_int info = LAPACKE_cheevd_2stage(LAPACK_COL_MAJOR, 'N', 'L', nn, big.data(), nn, w.data());
  if (info != 0) throw SolverError("cheevd_2stage failed with info=" + std::to_string(info));
  return {sq, Spectrum::from_values(Eigen::VectorXd(w.cast<double>()))};
}

}  // namespace detail

inline std::vector<Observables> observe(const EncodedState& psi, double p, const std::vector<double>& alphas,
                                        Precision prec = Precision::automatic) {
  const double q = psi.params.q;
  const bool single = use_single(prec, psi.params.dim_rq());
  const DensityMatrix rq = depolarize(psi.rho_rq(), p);
  const DensityMatrix dq = depolarize(psi.rho_q(), p);
  std::optional<Spectrum> sq1, srq1;
  std::vector<Observables> out;
  for (double a : alphas) {
    if (!(a >= 1.0)) throw DomainError("observe: alpha must be >= 1");
    if (std::isinf(a)) throw DomainError("observe: alpha = inf is only available in closed form");
    Observables o;
    o.alpha = a;
    if (a == 1.0) {
      if (!sq1) sq1 = detail::spectrum_at(dq.mat, single);
      if (!srq1) srq1 = detail::spectrum_at(rq.mat, single);
      o.s1q = entropy(*sq1, 1.0, q);
      o.s1rq = entropy(*srq1, 1.0, q);
      o.s2q = entropy(*sq1, 2.0, q);
    } else {
      const auto [sq, srq] = detail::reweighted_spectra(dq, rq, a, single, o.accept);
      o.s1q = entropy(sq, 1.0, q);
      o.s1rq = entropy(srq, 1.0, q);
      o.s2q = entropy(sq, 2.0, q);
    }
    o.ic = o.s1q - o.s1rq;
    out.push_back(o);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
  std::vector<int> Ns{7};
  std::vector<int> ks{1};
  std::vector<unsigned> qs{2};
  std::vector<double> p_grid{0.0, 0.1, 0.2, 0.3};
  std::vector<int> w_grid{1, 2};
  std::vector<double> alphas{1.0};
  int samples = 100;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::size_t budget_mb = 3072;
  bool big = false;
  unsigned threads = 1;
  bool dump_samples = false;

  /// Largest q^(N+k) allowed without --big, and with it.
  static constexpr std::size_t kDefaultMaxDim = std::size_t{1} << 12;
  static constexpr std::size_t kBigMaxDim = std::size_t{1} << 14;

  std::size_t max_dim() const { return big ? kBigMaxDim : kDefaultMaxDim; }

  /// Throws ConfigError on malformed settings, CapacityError when a point
  /// exceeds the dense envelope or the memory budget.
  void validate() const {
    if (Ns.empty() || ks.empty() || qs.empty()) throw ConfigError("N, k and q lists must be nonempty");
    if (p_grid.empty() && w_grid.empty()) throw ConfigError("need a p grid or a w grid");
    if (alphas.empty()) throw ConfigError("alpha list must be nonempty");
    if (samples < 1) throw ConfigError("samples must be >= 1");
    for (double p : p_grid)
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p values must lie in [0, 1]");
    for (double a : alphas)
      if (!(a >= 1.0)) throw ConfigError("alpha values must be >= 1");
    for (int N : Ns)
      for (int k : ks)
        for (unsigned q : qs) {
          if (q < 2 || k < 1 || k > N) throw ConfigError("invalid (N, k, q)");
          for (int w : w_grid)
            if (w < 0 || w > N) throw ConfigError("w grid entry outside [0, N]");
          double dim = std::pow(double(q), N + k);
          if (dim > double(max_dim()))
            throw CapacityError("q^(N+k) = " + fmt(dim) + " exceeds the dense envelope" +
                              (big ? "" : " (use --big for up to 2^14)"));
          // Working set: a few dense RQ matrices per worker.
          const double bytes = 4.0 * dim * dim * 16.0 * std::max(1u, threads);
          if (bytes > double(budget_mb) * (1 << 20))
            throw CapacityError("estimated memory " + fmt(bytes / (1 << 20)) + " MiB exceeds --budget-mb");
        }
  }

  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    try {
      get("N", c.Ns);
      get("k", c.ks);
      get("q", c.qs);
      get("p_grid", c.p_grid);
      get("w_grid", c.w_grid);
      get("alpha", c.alphas);
      get("samples", c.samples);
      get("seed", c.seed);
      get("out", c.out_dir);
      get("budget_mb", c.budget_mb);
      get("big", c.big);
      get("threads", c.threads);
      get("dump_samples", c.dump_samples);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad config: ") + e.what());
    }
    return c;
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path);
    try {
      return from_json(nlohmann::json::parse(is));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
  }

  nlohmann::json to_json() const {
    return {{"N", Ns},         {"k", ks},         {"q", qs},
            {"p_grid", p_grid}, {"w_grid", w_grid}, {"alpha", alphas},
            {"samples", samples}, {"seed", seed},   {"out", out_dir},
            {"budget_mb", budget_mb}, {"big", big}, {"threads", threads},
            {"dump_samples", dump_samples}};
  }
};

/// Parses "0.1,0.2" or "lo:hi:count" (inclusive linspace).
inline std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  try {
    if (s.find(':') != std::string::npos) {
      std::stringstream ss(s);
      std::string a, b, n;
      std::getline(ss, a, ':');
      std::getline(ss, b, ':');
      std::getline(ss, n, ':');
      const double lo = std::stod(a), hi = std::stod(b);
      const int cnt = std::stoi(n);
      if (cnt < 1) throw ConfigError("grid count must be >= 1");
      for (int i = 0; i < cnt; ++i) out.push_back(cnt == 1 ? lo : lo + (hi - lo) * i / (cnt - 1));
      return out;
    }
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) out.push_back(tok == "inf" ? kInfinity : std::stod(tok));
  } catch (const std::logic_error&) {
    throw ConfigError("cannot parse grid '" + s + "'");
  }
  return out;
}

template <class T>
std::vector<T> parse_int_list(const std::string& s) {
  std::vector<T> out;
  for (double v : parse_grid(s)) {
    if (v != std::floor(v) || v < 0) throw ConfigError("expected nonnegative integers in '" + s + "'");
    out.push_back(static_cast<T>(v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRecord {
  int N = 0, k = 0;
  unsigned q = 2;
  double p = 0, alpha = 1;
  int samples = 0;
  MeanErr ic, s1q, s1rq, s2q, accept;
  double ic_ansatz = 0, s2q_ansatz = 0;
};

inline constexpr const char* kSweepHeader =
    "N,k,q,p,alpha,samples,ic_mean,ic_stderr,s1q_mean,s1q_stderr,s1rq_mean,s1rq_stderr,s2q_mean,"
    "s2q_stderr,accept_mean,accept_stderr,ic_ansatz,s2q_ansatz";

/// Ansatz columns. alpha = 1: leading-order I_c and the Haar-averaged
/// enumerator value of S_2. alpha > 1: the same piecewise form with H_alpha,
/// and S_2 of rho^alpha / Tr rho^alpha built from leading Renyi entropies.
inline std::pair<double, double> sweep_ansatz(int N, int k, unsigned q, double p, double alpha) {
  if (alpha == 1.0) {
    const double ic = coherent_info_leading(p, N, k, q, 1.0);
    const double s2 = renyi2_from_enumerators(enumerator_haar(N, k, q), gamma_from_p(p, q)).s2_q;
    return {ic, s2};
  }
  const double ic = coherent_info_leading(p, N, k, q, alpha);
  if (std::isinf(alpha)) return {ic, renyi_entropy_leading(p, alpha, N, k, q, Subsystem::Q)};
  const double sa = renyi_entropy_leading(p, alpha, N, k, q, Subsystem::Q);
  const double s2a = renyi_entropy_leading(p, 2.0 * alpha, N, k, q, Subsystem::Q);
  return {ic, (2.0 * alpha - 1.0) * s2a - 2.0 * (alpha - 1.0) * sa};
}

inline void write_sweep_csv(const std::vector<SweepRecord>& recs, std::ostream& os) {
  os << kSweepHeader << "\n";
  for (const auto& r : recs) {
    os << r.N << ',' << r.k << ',' << r.q << ',' << fmt(r.p) << ',' << fmt(r.alpha) << ',' << r.samples
       << ',' << fmt(r.ic.mean) << ',' << fmt(r.ic.stderr_) << ',' << fmt(r.s1q.mean) << ','
       << fmt(r.s1q.stderr_) << ',' << fmt(r.s1rq.mean) << ',' << fmt(r.s1rq.stderr_) << ','
       << fmt(r.s2q.mean) << ',' << fmt(r.s2q.stderr_) << ',' << fmt(r.accept.mean) << ','
       << fmt(r.accept.stderr_) << ',' << fmt(r.ic_ansatz) << ',' << fmt(r.s2q_ansatz) << "\n";
  }
}

struct SweepResult {
  std::vector<SweepRecord> records;
  /// Per-sample observables keyed like records: samples[record][sample].
  std::vector<std::vector<Observables>> samples;
};

/// Monte-Carlo sweep over (N, k, q) x p x alpha. Sample s of a given (N, k, q)
/// always uses the same code, so rows share codes across p and alpha.
inline SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.p_grid.empty()) throw ConfigError("sweep needs a p grid");
  SweepResult res;
  for (int N : cfg.Ns)
    for (int k : cfg.ks)
      for (unsigned q : cfg.qs) {
        if (k > N) continue;
        const CodeParams params{N, k, q, cfg.seed};
        const std::size_t np = cfg.p_grid.size(), na = cfg.alphas.size();
        std::vector<std::vector<Observables>> per(np * na, std::vector<Observables>(cfg.samples));
        parallel_for(static_cast<std::size_t>(cfg.samples), cfg.threads, [&](std::size_t s) {
          const EncodedState psi = encode(params, s, cfg.max_dim());
          for (std::size_t ip = 0; ip < np; ++ip) {
            const auto obs = observe(psi, cfg.p_grid[ip], cfg.alphas);
            for (std::size_t ia = 0; ia < na; ++ia) per[ip * na + ia][s] = obs[ia];
          }
        });
        for (std::size_t ip = 0; ip < np; ++ip)
          for (std::size_t ia = 0; ia < na; ++ia) {
            const auto& v = per[ip * na + ia];
            SweepRecord r;
            r.N = N;
            r.k = k;
            r.q = q;
            r.p = cfg.p_grid[ip];
            r.alpha = cfg.alphas[ia];
            r.samples = cfg.samples;
            auto col = [&](double Observables::*f) {
              std::vector<double> x;
              x.reserve(v.size());
              for (const auto& o : v) x.push_back(o.*f);
              return mean_stderr(x);
            };
            r.ic = col(&Observables::ic);
            r.s1q = col(&Observables::s1q);
            r.s1rq = col(&Observables::s1rq);
            r.s2q = col(&Observables::s2q);
            r.accept = col(&Observables::accept);
            std::tie(r.ic_ansatz, r.s2q_ansatz) = sweep_ansatz(N, k, q, r.p, r.alpha);
            res.records.push_back(r);
            res.samples.push_back(v);
          }
      }
  return res;
}

inline void write_samples_csv(const SweepResult& res, std::ostream& os) {
  os << "N,k,q,p,alpha,sample,ic,s1q,s1rq,s2q,accept\n";
  for (std::size_t i = 0; i < res.records.size(); ++i) {
    const auto& r = res.records[i];
    for (std::size_t s = 0; s < res.samples[i].size(); ++s) {
      const auto& o = res.samples[i][s];
      os << r.N << ',' << r.k << ',' << r.q << ',' << fmt(r.p) << ',' << fmt(r.alpha) << ',' << s << ','
         << fmt(o.ic) << ',' << fmt(o.s1q) << ',' << fmt(o.s1rq) << ',' << fmt(o.s2q) << ','
         << fmt(o.accept) << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Scaling collapse

struct CollapsePoint {
  int N;
  double p, x, y;
};

struct CollapseResult {
  double nu = 1, p_c = 0;
  double score = 0;  // mean squared spread on the common grid
  std::vector<CollapsePoint> points;
};

/// Rescales x' = (p - p_c) N^(1/nu) and scores the collapse: each size's curve
/// is interpolated linearly onto 50 points spanning the overlap of all x'
/// ranges, and the score is the mean squared deviation from the cross-size mean.
inline CollapseResult scaling_collapse(const std::vector<CollapsePoint>& data, double nu, double p_c,
                                       std::size_t grid = 50) {
  std::map<int, std::vector<CollapsePoint>> by_n;
  for (auto pt : data) {
    pt.x = (pt.p - p_c) * std::pow(double(pt.N), 1.0 / nu);
    by_n[pt.N].push_back(pt);
  }
  if (by_n.size() < 3) throw DomainError("scaling_collapse: need at least three system sizes");
  CollapseResult res;
  res.nu = nu;
  res.p_c = p_c;
  double lo = -kInfinity, hi = kInfinity;
  for (auto& [n, pts] : by_n) {
    std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.x < b.x; });
    if (pts.size() < 2) throw DomainError("scaling_collapse: each size needs two or more points");
    lo = std::max(lo, pts.front().x);
    hi = std::min(hi, pts.back().x);
    res.points.insert(res.points.end(), pts.begin(), pts.end());
  }
  if (!(hi > lo)) throw DomainError("scaling_collapse: rescaled ranges do not overlap");
  auto interp = [](const std::vector<CollapsePoint>& pts, double x) {
    auto it = std::lower_bound(pts.begin(), pts.end(), x, [](auto& a, double v) { return a.x < v; });
    if (it == pts.begin()) return it->y;
    if (it == pts.end()) return pts.back().y;
    const auto& b = *it;
    const auto& a = *(it - 1);
    return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x);
  };
  double acc = 0;
  for (std::size_t g = 0; g < grid; ++g) {
    const double x = lo + (hi - lo) * g / (grid - 1);
    std::vector<double> ys;
    for (auto& [n, pts] : by_n) ys.push_back(interp(pts, x));
    double m = 0;
    for (double y : ys) m += y;
    m /= ys.size();
    for (double y : ys) acc += (y - m) * (y - m) / ys.size();
  }
  res.score = acc / grid;
  return res;
}

inline std::vector<CollapsePoint> collapse_input(const std::vector<SweepRecord>& recs, double alpha) {
  std::vector<CollapsePoint> out;
  for (const auto& r : recs)
    if (r.alpha == alpha) out.push_back({r.N, r.p, 0.0, r.ic.mean});
  return out;
}

/// p where the linear interpolation of ys(ps) first crosses zero going down.
inline std::optional<double> zero_crossing(const std::vector<double>& ps, const std::vector<double>& ys) {
  for (std::size_t i = 1; i < ps.size(); ++i)
    if ((ys[i - 1] > 0) != (ys[i] > 0)) return ps[i - 1] + (ps[i] - ps[i - 1]) * ys[i - 1] / (ys[i - 1] - ys[i]);
  return std::nullopt;
}

/// p where two curves on the same grid cross (first sign change of their difference).
inline std::optional<double> curve_crossing(const std::vector<double>& ps, const std::vector<double>& a,
                                            const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return zero_crossing(ps, d);
}

// ---------------------------------------------------------------------------
// Figure data

/// Histogram of values on [lo, hi] with `bins` uniform bins, as a density.
inline std::vector<double> histogram_density(const std::vector<double>& v, double lo, double hi, int bins) {
  std::vector<double> h(bins, 0.0);
  const double width = (hi - lo) / bins;
  for (double x : v) {
    const int b = static_cast<int>(std::floor((x - lo) / width));
    if (b >= 0 && b < bins) h[b] += 1.0;
  }
  for (double& x : h) x /= (v.size() * width);
  return h;
}

inline constexpr int kHistogramBins = 60;

/// Nonzero eigenvalues of the fixed-weight channel on Q, rescaled to unit mean.
inline std::vector<double> rescaled_nonzero(const Spectrum& s, std::size_t rank) {
  std::vector<double> v(s.values.begin(), s.values.begin() + std::min(rank, s.values.size()));
  double m = 0;
  for (double x : v) m += x;
  m /= v.size();
  for (double& x : v) x /= m;
  return v;
}

struct MicroBand {
  int N, k;
  unsigned q;
  int w;
  double c;
  double ks;
  std::vector<double> values;  // pooled rescaled eigenvalues
};

/// Pooled microcanonical Q spectra for one (N, k, q, w).
inline MicroBand micro_band(const CodeParams& params, int w, int samples, unsigned threads = 1) {
  const double om = omega_d(params.N, w, static_cast<int>(params.q));
  const double cols = om * params.dim_r();
  const std::size_t rank = static_cast<std::size_t>(std::min(cols, double(params.dim_q())));
  std::vector<std::vector<double>> per(samples);
  parallel_for(static_cast<std::size_t>(samples), threads, [&](std::size_t s) {
    const EncodedState psi = encode(params, s);
    per[s] = rescaled_nonzero(fixed_weight_spectrum(psi, w, Subsystem::Q), rank);
  });
  MicroBand mb{params.N, params.k, params.q, w, double(params.dim_q()) / cols, 0.0, {}};
  for (auto& v : per) mb.values.insert(mb.values.end(), v.begin(), v.end());
  const MarchenkoPastur mp(mb.c);
  mb.ks = ks_distance(mb.values, [&](double x) { return mp.cdf(x); });
  return mb;
}

struct Manifest {
  nlohmann::json j;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void finish(const std::string& path) {
    j["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream os(path);
    os << j.dump(2) << "\n";
  }
};

inline Manifest make_manifest(const std::string& command, const ExperimentConfig& cfg) {
  Manifest m;
  m.j["command"] = command;
  m.j["version"] = kVersion;
  m.j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
  m.j["config"] = cfg.to_json();
  m.j["seed"] = cfg.seed;
  m.j["outputs"] = nlohmann::json::array();
  return m;
}

enum class FigureKind { micro, canonical, postselect };

inline FigureKind parse_figure(const std::string& s) {
  if (s == "micro") return FigureKind::micro;
  if (s == "canonical") return FigureKind::canonical;
  if (s == "postselect") return FigureKind::postselect;
  throw ConfigError("unknown figure '" + s + "' (expected micro, canonical or postselect)");
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p, Manifest& m) {
  std::ofstream os(p);
  if (!os) throw ConfigError("cannot write " + p.string());
  m.j["outputs"].push_back(p.filename().string());
  return os;
}

inline void emit_micro(const ExperimentConfig& cfg, const std::filesystem::path& dir, Manifest& man) {
  auto hist = open_out(dir / "micro_hist.csv", man);
  auto summ = open_out(dir / "micro_summary.csv", man);
  hist << "N,k,q,w,c,bin_lo,bin_hi,bin_center,density,mp_density\n";
  summ << "N,k,q,w,samples,c,x_minus,x_plus,ks\n";
  for (int N : cfg.Ns)
    for (int k : cfg.ks)
      for (unsigned q : cfg.qs)
        for (int w : cfg.w_grid) {
          if (k > N || w > N || w < 1) continue;
          const MicroBand mb = micro_band(CodeParams{N, k, q, cfg.seed}, w, cfg.samples, cfg.threads);
          const auto [xm, xp] = mp_edges(mb.c);
          const double hi = 1.05 * xp;
          const auto h = histogram_density(mb.values, 0.0, hi, kHistogramBins);
          for (int b = 0; b < kHistogramBins; ++b) {
            const double lo_b = hi * b / kHistogramBins, hi_b = hi * (b + 1) / kHistogramBins;
            const double mid = 0.5 * (lo_b + hi_b);
            hist << N << ',' << k << ',' << q << ',' << w << ',' << fmt(mb.c) << ',' << fmt(lo_b) << ','
                 << fmt(hi_b) << ',' << fmt(mid) << ',' << fmt(h[b]) << ',' << fmt(mp_density(mb.c, mid))
                 << "\n";
          }
          summ << N << ',' << k << ',' << q << ',' << w << ',' << cfg.samples << ',' << fmt(mb.c) << ','
               << fmt(xm) << ',' << fmt(xp) << ',' << fmt(mb.ks) << "\n";
        }
}

inline void emit_canonical(const ExperimentConfig& cfg, const std::filesystem::path& dir, Manifest& man) {
  auto eigs = open_out(dir / "canonical_eigs.csv", man);
  auto bands = open_out(dir / "canonical_bands.csv", man);
  eigs << "N,k,q,p,index,mean,p05,p50,p95\n";
  bands << "N,k,q,p,w,multiplicity,empirical_mean,ansatz_mean,zeroth_mean,width\n";
  for (int N : cfg.Ns)
    for (int k : cfg.ks)
      for (unsigned q : cfg.qs) {
        if (k > N) continue;
        const CodeParams params{N, k, q, cfg.seed};
        const std::size_t dim = params.dim_q();
        for (double p : cfg.p_grid) {
          std::vector<std::vector<double>> per(cfg.samples);
          parallel_for(static_cast<std::size_t>(cfg.samples), cfg.threads, [&](std::size_t s) {
            const EncodedState psi = encode(params, s, cfg.max_dim());
            per[s] = spectrum(depolarize(psi.rho_q(), p)).values;
          });
          // Percentiles of the i-th largest eigenvalue across samples.
          std::vector<double> col(cfg.samples);
          auto pct = [&](double f) {
            const double pos = f * (col.size() - 1);
            const std::size_t i = static_cast<std::size_t>(pos);
            const double t = pos - i;
            return i + 1 < col.size() ? col[i] * (1 - t) + col[i + 1] * t : col[i];
          };
          for (std::size_t i = 0; i < dim; ++i) {
            double m = 0;
            for (int s = 0; s < cfg.samples; ++s) {
              col[s] = per[s][i];
              m += col[s];
            }
            std::sort(col.begin(), col.end());
            eigs << N << ',' << k << ',' << q << ',' << fmt(p) << ',' << i << ',' << fmt(m / cfg.samples)
                 << ',' << fmt(pct(0.05)) << ',' << fmt(pct(0.5)) << ',' << fmt(pct(0.95)) << "\n";
          }
          // Band-averaged means, assigning eigenvalues to bands by rank.
          const BandModel ms = mean_shift_bands(p, N, k, q, Subsystem::Q);
          const BandModel z0 = zeroth_order_bands(p, N, k, q, Subsystem::Q);
          std::size_t start = 0;
          auto emit = [&](const BandRecord& b, double zmean) {
            const std::size_t mult = static_cast<std::size_t>(std::llround(b.multiplicity));
            double acc = 0;
            for (int s = 0; s < cfg.samples; ++s)
              for (std::size_t i = start; i < std::min(start + mult, dim); ++i) acc += per[s][i];
            const double emp = mult > 0 ? acc / (double(mult) * cfg.samples) : 0.0;
            bands << N << ',' << k << ',' << q << ',' << fmt(p) << ',' << b.w << ',' << mult << ','
                  << fmt(emp) << ',' << fmt(b.mean) << ',' << fmt(zmean) << ',' << fmt(b.width) << "\n";
            start += mult;
          };
          for (const auto& b : ms.bands) emit(b, z0.bands[b.w].mean);
          emit(ms.reservoir, z0.bands[ms.reservoir.w].mean);
        }
      }
  ExperimentConfig sweep_cfg = cfg;
  sweep_cfg.alphas = {1.0};
  const SweepResult sw = run_sweep(sweep_cfg);
  auto sweep = open_out(dir / "canonical_sweep.csv", man);
  write_sweep_csv(sw.records, sweep);
  if (cfg.dump_samples) {
    auto smp = open_out(dir / "canonical_samples.csv", man);
    write_samples_csv(sw, smp);
  }
  if (cfg.Ns.size() >= 3) {
    const double pc = hashing_threshold(0.0, cfg.qs.front());
    auto col = open_out(dir / "canonical_collapse.csv", man);
    col << "N,p,x_nu1,x_nu2,ic\n";
    const auto in = collapse_input(sw.records, 1.0);
    const auto c1 = scaling_collapse(in, 1.0, pc);
    const auto c2 = scaling_collapse(in, 2.0, pc);
    for (const auto& pt : in)
      col << pt.N << ',' << fmt(pt.p) << ',' << fmt((pt.p - pc) * pt.N) << ','
          << fmt((pt.p - pc) * std::sqrt(double(pt.N))) << ',' << fmt(pt.y) << "\n";
    man.j["collapse"] = {{"p_c", pc}, {"score_nu1", c1.score}, {"score_nu2", c2.score}};
  }
}

inline void emit_postselect(const ExperimentConfig& cfg, const std::filesystem::path& dir, Manifest& man) {
  const unsigned q = cfg.qs.front();
  const int k = cfg.ks.front();
  {
    auto th = open_out(dir / "postselect_thresholds.csv", man);
    th << "alpha,p_c,detection\n";
    const double det = threshold_solve(ThresholdKind::detection, 0, 0.0, q);
    for (int i = 0; i <= 60; ++i) {
      const double a = std::pow(64.0, i / 60.0);
      th << fmt(a) << ',' << fmt(threshold_solve(ThresholdKind::renyi, a, 0.0, q)) << ',' << fmt(det) << "\n";
    }
    th << "inf," << fmt(threshold_solve(ThresholdKind::renyi, kInfinity, 0.0, q)) << ',' << fmt(det) << "\n";
  }
  {
    auto pb = open_out(dir / "postselect_boundary.csv", man);
    pb << "w_over_N,p_c\n";
    const double ph = hashing_threshold(0.0, q);
    for (int i = 0; i <= 100; ++i) {
      const double x = ph * i / 100.0;
      pb << fmt(x) << ',' << fmt(threshold_solve(ThresholdKind::postselected, x, 0.0, q)) << "\n";
    }
  }
  {
    auto r2 = open_out(dir / "postselect_renyi2.csv", man);
    r2 << "N,k,q,p,gamma,s2q_haar,s2q_limit,ic2_haar\n";
    const double top = 1.0 - 1.0 / (double(q) * q);
    for (int N : cfg.Ns) {
      const auto e = enumerator_haar(N, k, q);
      for (int i = 0; i <= 75; ++i) {
        const double p = top * i / 75.0;
        const double g = gamma_from_p(p, q);
        const auto r = renyi2_from_enumerators(e, g);
        const double lim = N * std::min(shannon_entropy(p, q, 2.0) + double(k) / N, 1.0);
        r2 << N << ',' << k << ',' << q << ',' << fmt(p) << ',' << fmt(g) << ',' << fmt(r.s2_q) << ','
           << fmt(lim) << ',' << fmt(r.ic2) << "\n";
      }
    }
  }
  const SweepResult sw = run_sweep(cfg);
  auto sweep = open_out(dir / "postselect_sweep.csv", man);
  write_sweep_csv(sw.records, sweep);
  if (cfg.dump_samples) {
    auto smp = open_out(dir / "postselect_samples.csv", man);
    write_samples_csv(sw, smp);
  }
  if (cfg.Ns.size() >= 3) {
    auto col = open_out(dir / "postselect_collapse.csv", man);
    col << "alpha,N,p,x_nu1,x_nu2,ic\n";
    nlohmann::json scores = nlohmann::json::array();
    for (double a : cfg.alphas) {
      const double pc = threshold_solve(ThresholdKind::renyi, a, 0.0, q);
      const auto in = collapse_input(sw.records, a);
      const auto c1 = scaling_collapse(in, 1.0, pc);
      const auto c2 = scaling_collapse(in, 2.0, pc);
      for (const auto& pt : in)
        col << fmt(a) << ',' << pt.N << ',' << fmt(pt.p) << ',' << fmt((pt.p - pc) * pt.N) << ','
            << fmt((pt.p - pc) * std::sqrt(double(pt.N))) << ',' << fmt(pt.y) << "\n";
      scores.push_back({{"alpha", a}, {"p_c", pc}, {"score_nu1", c1.score}, {"score_nu2", c2.score}});
    }
    man.j["collapse"] = scores;
  }
}

}  // namespace detail

/// Writes the CSV files for one figure family into cfg.out_dir plus a
/// manifest. Returns the manifest path.
inline std::string emit_figure_data(FigureKind fig, const ExperimentConfig& cfg) {
  cfg.validate();
  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  const char* name = fig == FigureKind::micro ? "micro" : fig == FigureKind::canonical ? "canonical" : "postselect";
  Manifest man = make_manifest(std::string("figure ") + name, cfg);
  switch (fig) {
    case FigureKind::micro: detail::emit_micro(cfg, dir, man); break;
    case FigureKind::canonical: detail::emit_canonical(cfg, dir, man); break;
    case FigureKind::postselect: detail::emit_postselect(cfg, dir, man); break;
  }
  const auto path = (dir / (std::string(name) + "_manifest.json")).string();
  man.finish(path);
  return path;
}

}  // namespace haarcode

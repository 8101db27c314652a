#include <gtest/gtest.h>

#include "oracles.hpp"

namespace hc = haarcode;
using hc::Subsystem;
using hc::ThresholdKind;

namespace {
const double kP2 = (3 - std::sqrt(3.0)) / 4;
}

TEST(ShannonEntropy, Examples) {
  for (unsigned q : {2u, 3u})
    for (double a : {1.0, 2.0, hc::kInfinity}) EXPECT_EQ(hc::shannon_entropy(0.0, q, a), 0.0);
  const double ph = hc::threshold_solve(ThresholdKind::renyi, 1.0, 0.0, 2);
  EXPECT_NEAR(ph, 0.1893, 5e-5);
  EXPECT_NEAR(hc::shannon_entropy(ph, 2), 1.0, 1e-9);
  for (double p : {0.1, 0.3, 0.6}) EXPECT_NEAR(hc::shannon_entropy(p, 2, hc::kInfinity), -std::log2(1 - p), 1e-14);
  EXPECT_NEAR(hc::threshold_solve(ThresholdKind::renyi, hc::kInfinity, 0.0, 2), 0.5, 1e-12);
  // Direct evaluation of the Shannon form.
  const double p = 0.17;
  EXPECT_NEAR(hc::shannon_entropy(p, 2), -p * std::log2(p / 3) - (1 - p) * std::log2(1 - p), 1e-14);
  EXPECT_NEAR(hc::shannon_entropy(p, 2, 1 + 1e-7), hc::shannon_entropy(p, 2), 1e-5);
  EXPECT_THROW(hc::shannon_entropy(1.2, 2), hc::DomainError);
  EXPECT_THROW(hc::shannon_entropy(0.1, 2, 0.5), hc::DomainError);
}

TEST(MarchenkoPastur, EdgesAndNormalization) {
  const auto e1 = hc::mp_edges(1.0);
  EXPECT_NEAR(e1.first, 0.0, 1e-15);
  EXPECT_NEAR(e1.second, 4.0, 1e-15);
  for (double c : {0.3, 1.5, 4.0, 30.0}) {
    const auto [lo, hi] = hc::mp_edges(c);
    const double mass = oracle::simpson([&](double x) { return hc::mp_density(c, x); }, lo, hi, 200000);
    EXPECT_NEAR(mass, 1.0, c > 1 ? 1e-6 : 1e-3);
    EXPECT_EQ(hc::mp_density(c, hi + 0.1), 0.0);
  }
  EXPECT_THROW(hc::mp_density(0.0, 1.0), hc::DomainError);
}

TEST(MarchenkoPastur, NarrowsForLargeC) {
  double prev = 1e9;
  for (double c : {2.0, 20.0, 200.0, 2000.0}) {
    const auto [lo, hi] = hc::mp_edges(c);
    const double var = oracle::simpson([&](double x) { return (x - 1) * (x - 1) * hc::mp_density(c, x); }, lo, hi, 200000);
    EXPECT_LT(var, prev);
    EXPECT_NEAR(var, 1.0 / c, 2e-3 / c + 1e-6);
    prev = var;
  }
}

TEST(MarchenkoPastur, TabulatedCdfMatchesOracle) {
  for (double c : {2.5, 12.0}) {
    hc::MarchenkoPastur mp(c);
    oracle::MpCdf ref(c);
    for (double t : {0.1, 0.3, 0.5, 0.8, 0.95}) {
      const double x = mp.lower() + t * (mp.upper() - mp.lower());
      EXPECT_NEAR(mp.cdf(x), ref(x), 1e-4);
    }
  }
}

TEST(CriticalWeight, Examples) {
  EXPECT_EQ(hc::critical_weight(13, 1, 2, Subsystem::RQ), 4);
  EXPECT_EQ(hc::critical_weight(13, 1, 2, Subsystem::Q), 3);
  EXPECT_EQ(hc::critical_weight(1, 1, 2, Subsystem::RQ), 1);
  for (int N = 2; N <= 20; ++N)
    for (int k : {1, 2})
      for (int q : {2, 3})
        for (bool rq : {true, false})
          EXPECT_EQ(hc::critical_weight(N, k, q, rq ? Subsystem::RQ : Subsystem::Q), oracle::critical_weight(N, k, q, rq));
}

TEST(ZerothOrder, Examples) {
  const auto m0 = hc::zeroth_order_bands(0.0, 5, 1, 2, Subsystem::Q);
  EXPECT_NEAR(m0.bands[0].multiplicity * m0.bands[0].mean, 1.0, 1e-15);
  for (std::size_t w = 1; w < m0.bands.size(); ++w) EXPECT_EQ(m0.bands[w].mean, 0.0);

  const double p = 0.1;
  const auto m = hc::zeroth_order_bands(p, 5, 1, 2, Subsystem::Q);
  EXPECT_NEAR(m.bands[1].mean / m.bands[0].mean, p / (3 * (1 - p)), 1e-14);
  EXPECT_NEAR(m.total_mass(), 1.0, 1e-12);
}

TEST(MeanShift, TraceIdentity) {
  for (unsigned q : {2u, 3u})
    for (int k : {1, 2})
      for (int N = k; N <= 13; ++N) {
        if (std::pow(double(q), N + k) > 1e12) continue;
        for (auto sub : {Subsystem::Q, Subsystem::RQ})
          for (double p : {0.0, 0.03, 0.12, 0.19, 0.3, 0.6}) {
            const auto m = hc::mean_shift_bands(p, N, k, q, sub);
            EXPECT_NEAR(m.total_mass(), 1.0, 1e-10) << N << " " << k << " " << q << " " << p;
            EXPECT_NEAR(m.reservoir.multiplicity + [&] {
              double s = 0;
              for (const auto& b : m.bands) s += b.multiplicity;
              return s;
            }(), m.dimension(), 1e-6);
          }
      }
}

TEST(MeanShift, NoiselessAndOracleMeans) {
  const auto m = hc::mean_shift_bands(0.0, 9, 1, 2, Subsystem::RQ);
  EXPECT_NEAR(m.bands[0].mean, 1.0, 1e-15);
  for (std::size_t w = 1; w < m.bands.size(); ++w) EXPECT_EQ(m.bands[w].mean, 0.0);
  EXPECT_EQ(m.reservoir.mean, 0.0);
  for (double p : {0.05, 0.12, 0.2}) {
    const auto mq = hc::mean_shift_bands(p, 13, 1, 2, Subsystem::Q);
    for (const auto& b : mq.bands) EXPECT_NEAR(b.mean, oracle::msa_q_mean(13, 1, 2, p, b.w), 1e-11 * b.mean);
  }
}

TEST(MeanShift, AgreesWithZerothOrderAtLowNoise) {
  // On RQ the weight w_c - 2 band is shifted by about 2% at half the hashing
  // rate, so the 1% agreement is checked one band lower there.
  const int N = 13, k = 1;
  const double p = 0.5 * hc::hashing_threshold(0.0, 2);
  for (auto sub : {Subsystem::Q, Subsystem::RQ}) {
    const int wc = hc::critical_weight(N, k, 2, sub);
    const int top = sub == Subsystem::Q ? wc - 2 : wc - 3;
    const auto ms = hc::mean_shift_bands(p, N, k, 2, sub);
    const auto z = hc::zeroth_order_bands(p, N, k, 2, sub);
    for (int w = 0; w <= top; ++w) EXPECT_NEAR(ms.bands[w].mean / z.bands[w].mean, 1.0, 0.01) << w;
    EXPECT_GT(ms.bands[wc - 1].mean / z.bands[wc - 1].mean, 1.0);
  }
}

TEST(MeanShift, LeadingEigenvalueBridge) {
  for (int N : {9, 11, 13})
    for (double p : {0.02, 0.05, 0.1}) {
      const auto m = hc::mean_shift_bands(p, N, 1, 2, Subsystem::RQ);
      const double u = hc::u_from_p(p, 2);
      const double want = std::pow(1 - p, N) * oracle::a_haar(N, 1, 2, u);
      EXPECT_LE(std::abs(m.bands[0].mean / want - 1), 10 * std::pow(2.0, -(N - 1)));
    }
}

TEST(BandDensity, PlainMpAndMass) {
  hc::BandRecord b;
  b.w = 1;
  b.weight_prob = 1.0;
  b.multiplicity = 27;
  b.c = 1024.0 / 27;
  b.mean = 1.0 / 27;
  b.shift = 0.0;
  for (double x : {0.6, 0.9, 1.0, 1.2})
    EXPECT_NEAR(hc::band_model_density(b, x / 27), 27 * hc::mp_density(b.c, x), 1e-12);

  const auto m = hc::mean_shift_bands(0.12, 13, 1, 2, Subsystem::Q);
  for (const auto& r : m.bands) {
    if (r.w == 0) continue;
    const double lo = r.shift + r.weight_prob / r.multiplicity * hc::mp_edges(r.c).first;
    const double hi = r.shift + r.weight_prob / r.multiplicity * hc::mp_edges(r.c).second;
    const double mass = oracle::simpson([&](double x) { return r.multiplicity * hc::band_model_density(r, x); }, lo, hi, 200000);
    EXPECT_NEAR(mass / r.multiplicity, 1.0, 1e-4);
    EXPECT_NEAR(hc::band_model_cdf(r)(hi * 1.0001), 1.0, 1e-6);
  }
}

TEST(LeadingOrder, CoherentInformation) {
  EXPECT_EQ(hc::coherent_info_leading(0.0, 13, 1, 2), 1.0);
  EXPECT_EQ(hc::coherent_info_leading(0.05, 13, 1, 2), 1.0);
  EXPECT_EQ(hc::coherent_info_leading(0.4, 13, 1, 2), -1.0);
  const double p = 0.1893;
  EXPECT_NEAR(hc::coherent_info_leading(p, 13, 1, 2), 13 * (1 - hc::shannon_entropy(p, 2)), 1e-12);
}

TEST(LeadingOrder, RenyiEntropies) {
  EXPECT_EQ(hc::renyi_entropy_leading(0.0, 2.0, 9, 1, 2, Subsystem::Q), 1.0);
  EXPECT_EQ(hc::renyi_entropy_leading(0.0, 2.0, 9, 1, 2, Subsystem::RQ), 0.0);
  EXPECT_EQ(hc::renyi_entropy_leading(0.3, 1.0, 9, 1, 2, Subsystem::Q), 9.0);
  EXPECT_NEAR(hc::renyi_entropy_leading(0.1, 1.0, 13, 1, 2, Subsystem::Q), 1 + 13 * hc::shannon_entropy(0.1, 2), 1e-12);
  EXPECT_EQ(hc::renyi_entropy_leading(0.7, 2.0, 9, 1, 2, Subsystem::RQ), 10.0);
}

TEST(WStar, Examples) {
  for (double p : {0.05, 0.2, 0.5}) EXPECT_NEAR(hc::w_star(p, 1.0, 13, 2), p * 13, 1e-12);
  EXPECT_LT(hc::w_star_fraction(0.3, 1000.0, 2), 1e-100);
  EXPECT_EQ(hc::w_star_fraction(0.3, hc::kInfinity, 2), 0.0);
  // alpha = 2, p = 0.3: 3 (0.1)^2 / (0.49 + 3 (0.1)^2).
  EXPECT_NEAR(hc::w_star_fraction(0.3, 2.0, 2), 0.03 / 0.52, 1e-14);
  EXPECT_NEAR(hc::w_star_fraction(0.3, 2.0, 2), 0.058, 5e-4);
  EXPECT_EQ(hc::p_alpha(0.3, 2.0, 2), hc::w_star_fraction(0.3, 2.0, 2));
}

TEST(Thresholds, Examples) {
  EXPECT_NEAR(hc::threshold_solve(ThresholdKind::renyi, 2.0, 0.0, 2), kP2, 1e-10);
  EXPECT_NEAR(hc::threshold_solve(ThresholdKind::postselected, 0.0, 0.0, 2), 0.5, 1e-10);
  EXPECT_NEAR(hc::threshold_solve(ThresholdKind::detection, 0.0, 0.0, 2), 0.5, 1e-15);
  // Postselected boundary meets the hashing point at w/N = p_hash. The root is
  // a tangency there, so bisection only resolves it to ~sqrt(eps).
  const double ph = hc::hashing_threshold(0.0, 2);
  EXPECT_NEAR(hc::threshold_solve(ThresholdKind::postselected, ph, 0.0, 2), ph, 1e-6);
  EXPECT_THROW(hc::threshold_solve(ThresholdKind::renyi, 1.0, 1.5, 2), hc::DomainError);
}

TEST(Thresholds, Consistency) {
  for (double r : {0.0, 1.0 / 13, 0.2}) {
    const double p1 = hc::threshold_solve(ThresholdKind::renyi, 1.0, r, 2);
    EXPECT_NEAR(hc::shannon_entropy(p1, 2), 1 - r, 1e-9);
    // Independent bisection on the oracle entropy.
    const double lo = oracle::zero_rate_threshold(2, 1.0);
    if (r == 0.0) EXPECT_NEAR(p1, lo, 1e-9);
    EXPECT_NEAR(hc::threshold_solve(ThresholdKind::renyi, hc::kInfinity, r, 2),
                hc::threshold_solve(ThresholdKind::detection, 0.0, r, 2), 1e-9);
  }
  for (unsigned q : {2u, 3u}) {
    double prev = 0;
    for (double a = 1.0; a <= 64.0; a *= 1.25) {
      const double pc = hc::threshold_solve(ThresholdKind::renyi, a, 0.1, q);
      EXPECT_GE(pc, prev - 1e-10);
      prev = pc;
    }
  }
}

TEST(Enumerators, AnalyticEndpoints) {
  for (int N : {3, 7, 11})
    for (int k : {1, 2}) {
      const auto e = hc::enumerator_haar(N, k, 2);
      EXPECT_NEAR(e.A(0), 1.0, 1e-12);
      EXPECT_NEAR(e.B(0), 1.0, 1e-12);
      EXPECT_NEAR(e.A(1), std::pow(2.0, N - k), 1e-9 * std::pow(2.0, N - k));
      EXPECT_NEAR(e.B(1), std::pow(2.0, N + k), 1e-9 * std::pow(2.0, N + k));
      for (double u : {0.1, 0.5}) EXPECT_NEAR(e.A(u), oracle::a_haar(N, k, 2, u), 1e-9 * e.A(u));
    }
  const auto full = hc::enumerator_haar(4, 4, 2);
  EXPECT_EQ(full.a(), 0.0);
  for (double u : {0.0, 0.3, 1.0}) EXPECT_NEAR(full.A(u), 1.0, 1e-15);
}

TEST(Enumerators, MacWilliams) {
  const auto h = hc::enumerator_haar(9, 1, 2);
  for (double u : {0.0, 0.1, 1.0 / 3, 0.6, 1.0}) {
    const auto r = hc::macwilliams_check(h, u);
    EXPECT_LT(std::abs(r.transform), 1e-10 * h.A(1));
    EXPECT_LT(std::abs(r.crossing), 1e-10 * h.A(1));
  }
  for (const auto& p : {hc::CodeParams{5, 1, 2, 1}, hc::CodeParams{4, 2, 2, 1}, hc::CodeParams{3, 1, 3, 1}}) {
    for (std::uint64_t s = 0; s < 3; ++s) {
      const auto e = hc::EnumeratorPair::numeric(hc::encode(p, s));
      EXPECT_NEAR(e.A(0), 1.0, 1e-12);
      EXPECT_NEAR(e.B(0), 1.0, 1e-12);
      EXPECT_NEAR(e.A(1), std::pow(double(p.q), p.N - p.k), 1e-9);
      EXPECT_NEAR(e.B(1), std::pow(double(p.q), p.N + p.k), 1e-8);
      for (double u : {0.0, 0.2, 1.0 / 3, 0.7, 1.0}) EXPECT_LT(std::abs(hc::macwilliams_check(e, u).transform), 1e-9);
    }
  }
}

TEST(Enumerators, SampleMeanMatchesHaar) {
  // Cheaper size than the acceptance check; same 3 SE rule.
  const int N = 7;
  const auto h = hc::enumerator_haar(N, 1, 2);
  for (double u : {0.1, 1.0 / 3, 0.6}) {
    std::vector<double> a;
    for (std::uint64_t s = 0; s < 60; ++s) a.push_back(hc::EnumeratorPair::numeric(hc::encode(hc::CodeParams{N, 1, 2, 50}, s)).A(u));
    const auto me = hc::mean_stderr(a);
    EXPECT_NEAR(me.mean, h.A(u), 3 * me.stderr_ + 1e-12);
  }
}

TEST(Enumerators, PostselectFailure) {
  const auto h = hc::enumerator_haar(11, 1, 2);
  EXPECT_NEAR(hc::postselect_failure(h, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(hc::postselect_failure(h, 1.0 / 3), 1.0 / 3, 1e-9);
  EXPECT_NEAR(hc::postselect_failure(hc::enumerator_haar(6, 2, 2), 1.0 / 3), 3.0 / 5, 1e-9);
  const double f = hc::postselect_failure(h, hc::u_from_p(0.3, 2));
  EXPECT_GT(f, 0.0);
  EXPECT_LT(f, 1.0 / 3);
  double prev = -1;
  for (double p = 0.0; p < 0.5; p += 0.02) {
    const double v = hc::postselect_failure(h, hc::u_from_p(p, 2));
    EXPECT_GE(v, prev - 1e-12);
    prev = v;
  }
}

TEST(Enumerators, Renyi2) {
  const int N = 5;
  const auto psi = hc::encode(hc::CodeParams{N, 1, 2, 70}, 0);
  const auto e = hc::EnumeratorPair::numeric(psi);
  const double g = 0.3, p = hc::p_from_gamma(g, 2);
  const auto r = hc::renyi2_from_enumerators(e, g);
  EXPECT_NEAR(r.s2_q, -std::log2(oracle::purity(hc::depolarize(psi.rho_q(), p).mat)), 1e-9);
  EXPECT_NEAR(r.s2_rq, -std::log2(oracle::purity(hc::depolarize(psi.rho_rq(), p).mat)), 1e-9);
  EXPECT_NEAR(r.ic2, r.s2_q - r.s2_rq, 1e-15);

  const auto r0 = hc::renyi2_from_enumerators(hc::enumerator_haar(N, 1, 2), 0.0);
  EXPECT_NEAR(r0.s2_q, 1.0, 1e-12);
  EXPECT_NEAR(r0.s2_rq, 0.0, 1e-12);

  const double g2 = hc::renyi2_crossing_gamma(2);
  EXPECT_NEAR(g2, 1 - 1 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(hc::p_from_gamma(g2, 2), kP2, 1e-15);
  // Zero-rate limit: the crossing approaches gamma_2 as N grows.
  const auto big = hc::enumerator_haar(60, 1, 2);
  EXPECT_LT(std::abs(hc::renyi2_from_enumerators(big, g2).ic2), 0.05);
  EXPECT_THROW(hc::renyi2_from_enumerators(big, 1.5), hc::DomainError);
}

TEST(ReweightedVn, Examples) {
  EXPECT_EQ(hc::reweighted_vn_leading(0.0, 2.0, 13, 1, 2), 1.0);
  const double ph = hc::hashing_threshold(1.0 / 13, 2);
  const double below = hc::reweighted_vn_leading(ph - 1e-7, 1.0, 13, 1, 2);
  EXPECT_NEAR(below, 13.0, 1e-4);
  // Jump at the alpha = 2 threshold.
  const double pc = hc::threshold_solve(ThresholdKind::renyi, 2.0, 1.0 / 200, 2);
  EXPECT_LT(pc, kP2);
  EXPECT_LT(hc::reweighted_vn_leading(pc - 1e-6, 2.0, 200, 1, 2), 199.0);
  EXPECT_EQ(hc::reweighted_vn_leading(pc + 1e-6, 2.0, 200, 1, 2), 200.0);
}

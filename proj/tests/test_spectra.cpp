#include <gtest/gtest.h>

#include "oracles.hpp"

namespace hc = haarcode;
using hc::Complex;
using hc::Matrix;
using hc::Spectrum;
using hc::Subsystem;
using hc::Vector;

TEST(SpectrumOp, Examples) {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 0.3;
  d(1, 1) = 0.7;
  const auto s = hc::spectrum(d);
  ASSERT_EQ(s.values.size(), 2u);
  EXPECT_NEAR(s.values[0], 0.7, 1e-15);
  EXPECT_NEAR(s.values[1], 0.3, 1e-15);

  const auto m = hc::spectrum(Matrix(Matrix::Identity(8, 8) / 8.0));
  for (double x : m.values) EXPECT_NEAR(x, 0.125, 1e-15);
  EXPECT_NEAR(m.trace, 1.0, 1e-14);

  hc::RandomStream rng(1, 0);
  Vector v = hc::ginibre(16, 1, rng).col(0);
  v.normalize();
  const auto p = hc::spectrum(Matrix(v * v.adjoint()));
  EXPECT_NEAR(p.values[0], 1.0, 1e-12);
  for (std::size_t i = 1; i < p.values.size(); ++i) EXPECT_EQ(p.values[i], 0.0);
}

TEST(SpectrumOp, RejectsNonHermitian) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 1) = 1.0;
  EXPECT_THROW(hc::spectrum(a), hc::InputError);
  EXPECT_THROW(hc::spectrum(Matrix(Matrix::Zero(2, 3))), hc::ShapeError);
}

TEST(SpectrumOp, AgreesWithIndependentSolverAndReconstructs) {
  const auto psi = hc::encode(hc::CodeParams{5, 1, 2, 3}, 0);
  const Matrix rho = hc::depolarize(psi.rho_rq(), 0.15).mat;
  const auto s = hc::spectrum(rho);
  const auto ref = oracle::eigen_values_desc(rho);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(s.values[i], std::max(ref[i], 0.0), 1e-12);
  EXPECT_LT(hc::reconstruction_residual(rho), 1e-9);
}

TEST(SpectrumOp, SinglePrecisionEigenvalues) {
  const auto psi = hc::encode(hc::CodeParams{6, 1, 2, 3}, 0);
  const Matrix rho = hc::depolarize(psi.rho_rq(), 0.2).mat;
  const auto ref = oracle::eigen_values_desc(rho);
  Eigen::VectorXd f = hc::hermitian_eigenvalues_single(rho);
  std::vector<double> fv(f.data(), f.data() + f.size());
  std::sort(fv.begin(), fv.end(), std::greater<>());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(fv[i], ref[i], 2e-6);
  EXPECT_FALSE(hc::use_single(hc::Precision::automatic, 2048));
  EXPECT_TRUE(hc::use_single(hc::Precision::automatic, 4096));
  EXPECT_FALSE(hc::use_single(hc::Precision::double_precision, 1 << 14));
  EXPECT_TRUE(hc::use_single(hc::Precision::single_precision, 2));
}

TEST(Entropy, Examples) {
  for (std::size_t m : {1u, 3u, 8u}) {
    const auto s = Spectrum::from_values(std::vector<double>(m, 1.0 / m), 16);
    for (double a : {1.0, 1.5, 2.0, 4.0, hc::kInfinity}) EXPECT_NEAR(hc::entropy(s, a, 2.0), std::log2(double(m)), 1e-12);
    EXPECT_NEAR(hc::entropy(s, 2.0, 3.0), std::log(double(m)) / std::log(3.0), 1e-12);
  }
  const auto pure = Spectrum::from_values(std::vector<double>{1.0, 0.0, 0.0});
  for (double a : {1.0, 2.0, hc::kInfinity}) EXPECT_NEAR(hc::entropy(pure, a), 0.0, 1e-15);
  const auto s = Spectrum::from_values(std::vector<double>{0.2, 0.5, 0.3});
  EXPECT_NEAR(hc::entropy(s, hc::kInfinity, 2.0), 1.0, 1e-15);
  EXPECT_THROW(hc::entropy(s, 0.5), hc::DomainError);
}

TEST(Entropy, ContinuousAtAlphaOne) {
  const auto s = Spectrum::from_values(std::vector<double>{0.4, 0.25, 0.2, 0.1, 0.05});
  const double h = hc::entropy(s, 1.0);
  double direct = 0;
  for (double x : s.values) direct -= x * std::log2(x);
  EXPECT_NEAR(h, direct, 1e-14);
  EXPECT_NEAR(hc::entropy(s, 1.0 + 1e-6), h, 1e-4);
}

TEST(Entropy, MonotoneInAlpha) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto psi = hc::encode(hc::CodeParams{4, 1, 2, seed}, 0);
    const auto s = hc::spectrum(hc::depolarize(psi.rho_q(), 0.1 + 0.1 * seed));
    double prev = hc::kInfinity;
    for (double a : {1.0, 1.5, 2.0, 4.0, hc::kInfinity}) {
      const double h = hc::entropy(s, a);
      EXPECT_LE(h, prev + 1e-12);
      EXPECT_GE(h, -1e-12);
      EXPECT_LE(h, 4.0 + 1e-9);
      prev = h;
    }
  }
}

TEST(CoherentInformation, Limits) {
  const auto mq = Spectrum::from_values(std::vector<double>(32, 1.0 / 32));
  const auto mrq = Spectrum::from_values(std::vector<double>(64, 1.0 / 64));
  EXPECT_NEAR(hc::coherent_information(mq, mrq), -1.0, 1e-12);

  const auto psi = hc::encode(hc::CodeParams{5, 1, 2, 4}, 0);
  const auto sq = hc::spectrum(psi.rho_q()), srq = hc::spectrum(psi.rho_rq());
  EXPECT_NEAR(hc::coherent_information(sq, srq), 1.0, 1e-10);
  EXPECT_NEAR(hc::coherent_information(sq, srq, hc::kInfinity), 1.0, 1e-10);
  EXPECT_NEAR(-std::log2(sq.max()) + std::log2(srq.max()), 1.0, 1e-10);
}

TEST(CoherentInformation, BoundedByK) {
  for (int k : {1, 2})
    for (double p : {0.05, 0.2, 0.4, 0.7}) {
      const auto psi = hc::encode(hc::CodeParams{4, k, 2, 6}, 0);
      const auto sq = hc::spectrum(hc::depolarize(psi.rho_q(), p));
      const auto srq = hc::spectrum(hc::depolarize(psi.rho_rq(), p));
      const double ic = hc::coherent_information(sq, srq);
      EXPECT_LE(ic, k + 1e-6);
      EXPECT_GE(ic, -k - 1e-6);
      // Independent entropies from Eigen's solver.
      const double want = oracle::vn_entropy(oracle::eigen_values_desc(hc::depolarize(psi.rho_q(), p).mat), 2) -
                          oracle::vn_entropy(oracle::eigen_values_desc(hc::depolarize(psi.rho_rq(), p).mat), 2);
      EXPECT_NEAR(ic, want, 1e-9);
    }
}

TEST(Bands, RanksAndResolutionOfIdentity) {
  const hc::CodeParams p{9, 1, 2, 10};
  const auto psi = hc::encode(p, 0);
  const auto b = hc::band_projectors(psi, 9);
  EXPECT_EQ(b.ranks[0], 1u);
  EXPECT_EQ(b.ranks[1], 27u);
  EXPECT_EQ(b.ranks[2], 324u);
  std::size_t total = b.residual_rank;
  for (std::size_t r : b.ranks) total += r;
  EXPECT_EQ(total, 1024u);
  // Band w_c;RQ - 1 is full, w_c;RQ is truncated, beyond is empty.
  const int wc = oracle::critical_weight(9, 1, 2, true);
  EXPECT_EQ(wc, 3);
  EXPECT_LT(b.ranks[3], 2268u);
  for (std::size_t w = 4; w < b.ranks.size(); ++w) EXPECT_EQ(b.ranks[w], 0u);
  EXPECT_EQ(b.residual_rank, 0u);
}

TEST(Bands, OrthogonalAndSpanTheErrors) {
  const auto psi = hc::encode(hc::CodeParams{6, 1, 2, 11}, 0);
  const auto b = hc::band_projectors(psi, 6);
  for (std::size_t w = 0; w < b.bases.size(); ++w) {
    if (b.ranks[w] == 0) continue;
    EXPECT_LT((b.bases[w].adjoint() * b.bases[w] - Matrix::Identity(b.ranks[w], b.ranks[w])).cwiseAbs().maxCoeff(), 1e-10);
    for (std::size_t v = w + 1; v < b.bases.size(); ++v) {
      if (b.ranks[v] == 0) continue;
      EXPECT_LT((b.bases[w].adjoint() * b.bases[v]).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
  // Every weight-1 corrupted vector lies in bands 0 and 1.
  Matrix low(b.dim, b.ranks[0] + b.ranks[1]);
  low << b.bases[0], b.bases[1];
  for (const auto& mu : hc::enumerate_fixed_weight(6, 1, 2)) {
    const Vector e = hc::apply_error(psi.amplitudes, mu, hc::default_site_map(6));
    EXPECT_LT((e - low * (low.adjoint() * e)).norm(), 1e-10);
  }
}

TEST(Bands, RankStabilityAcrossSamples) {
  // Bands below w_c;RQ - 1 should be full rank in nearly every sample.
  const hc::CodeParams p{7, 1, 2, 12};
  const int wc = oracle::critical_weight(7, 1, 2, true);
  int good = 0, total = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto b = hc::band_projectors(hc::encode(p, s), static_cast<std::size_t>(wc));
    for (int w = 0; w < wc - 1; ++w) {
      ++total;
      good += b.ranks[w] == static_cast<std::size_t>(hc::omega_d(7, w, 2));
    }
  }
  EXPECT_GE(good, 0.95 * total);
}

TEST(Bands, CodespaceVariant) {
  const auto psi = hc::encode(hc::CodeParams{7, 1, 2, 13}, 0);
  const auto b = hc::band_projectors(psi, 2, Subsystem::Q);
  EXPECT_EQ(b.ranks[0], 2u);
  EXPECT_EQ(b.ranks[1], 42u);
  EXPECT_EQ(b.dim, 128u);
  EXPECT_LT((b.projector(0) - 2.0 * psi.rho_q_matrix()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_THROW(b.projector(3), hc::DomainError);
  EXPECT_THROW(hc::band_projectors(psi, 8), hc::DomainError);
}

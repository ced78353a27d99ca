#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "pinlab/enumeration.hpp"
#include "pinlab/quenched_dp.hpp"

using namespace pinlab;

namespace {

const SlowlyVarying kOne = SlowlyVarying::constant(1.0);

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Enumeration, HandComputedSmallN) {
  // N = 2: Z = T(2) + w1 K(1) T(1) + w2 K(2) + w1 w2 K(1)^2
  const auto law = ExcursionLaw::geometric(0.4);
  const double beta = 0.7, u = -0.2;
  const std::vector<double> V{0.3, -1.1};
  const double w1 = std::exp(beta * (u + V[0])), w2 = std::exp(beta * (u + V[1]));
  const double K1 = 0.4, K2 = 0.24, T1 = 0.6, T2 = 0.36;
  const double Z = T2 + w1 * K1 * T1 + w2 * K2 + w1 * w2 * K1 * K1;
  const double L = (w1 * K1 * T1 + w2 * K2 + 2 * w1 * w2 * K1 * K1) / Z;
  const auto e = enumerate_returns(law, beta, u, V);
  EXPECT_NEAR(e.log_Z, std::log(Z), 1e-15);
  EXPECT_NEAR(e.mean_LN, L, 1e-15);
  const auto d = dp_solve(law, beta, u, V);
  EXPECT_NEAR(d.log_Z, std::log(Z), 1e-14);
  EXPECT_NEAR(d.mean_LN, L, 1e-14);
  EXPECT_THROW(enumerate_returns(law, beta, u, std::vector<double>(25, 0.0)), std::invalid_argument);
}

TEST(DP, MatchesEnumeration) {
  std::vector<ExcursionLaw> laws{build_law(1.25, kOne, 0.0, 1024), build_law(1.5, kOne, 0.0, 1024),
                                 build_law(1.75, kOne, 0.1, 1024), ExcursionLaw::geometric(0.3),
                                 ExcursionLaw::deterministic(3, 0.05)};
  Xoshiro256pp rng(99);
  for (int cs = 0; cs < 100; ++cs) {
    const auto& law = laws[rng() % laws.size()];
    const std::size_t N = 1 + rng() % 14;
    const double beta = 0.05 + 0.95 * rng.uniform();
    const double u = -1 + 2 * rng.uniform();
    const auto V = gaussian_vector(rng(), N);
    const auto d = dp_solve(law, beta, u, V);
    const auto e = enumerate_returns(law, beta, u, V);
    EXPECT_LT(rel(d.log_Z, e.log_Z), 1e-9) << cs;
    EXPECT_LT(rel(d.mean_LN, e.mean_LN), 1e-9) << cs;
  }
}

TEST(DP, ZeroTemperatureLimits) {
  const auto law = build_law(1.5, kOne, 0.0, 1024);
  const std::vector<double> V(200, 0.0);
  EXPECT_NEAR(dp_solve(law, 1.0, 0.0, V).log_Z, 0.0, 1e-12);  // Z = sum over paths of P = 1
  const auto hi = dp_solve(law, 1.0, 50.0, V);
  EXPECT_NEAR(hi.mean_LN, 200.0, 1e-6);
  const auto lo = dp_solve(law, 1.0, -50.0, V);
  EXPECT_LT(lo.mean_LN, 1e-10);
  EXPECT_NEAR(lo.log_Z, std::log(law.tail(200)), 1e-9);
}

TEST(DP, ScaledPathAgreesWithLogDomain) {
  const auto law = build_law(1.75, kOne, 0.0, 4096);
  for (double u : {-3.0, -0.4, 0.0, 0.6, 5.0}) {
    const auto V = gaussian_vector(5, 3000);
    const auto a = dp_solve(law, 1.0, u, V);
    const auto b = dp_solve(law, 1.0, u, V, {.force_log_domain = true});
    EXPECT_LT(rel(a.log_Z, b.log_Z), 1e-11) << u;
    EXPECT_LT(rel(a.mean_LN, b.mean_LN), 1e-9) << u;
    for (std::size_t n : {1ul, 1500ul, 3000ul}) EXPECT_LT(rel(a.log_z_pinned[n], b.log_z_pinned[n]), 1e-11);
  }
}

TEST(DP, DeterministicLawSkipsZeros) {
  const auto law = ExcursionLaw::deterministic(2);
  const std::vector<double> V(10, 0.0);
  const auto d = dp_solve(law, 1.0, 0.5, V);
  EXPECT_NEAR(d.log_Z, 5 * 0.5, 1e-12);
  EXPECT_NEAR(d.mean_LN, 5.0, 1e-12);
  EXPECT_EQ(d.log_z_pinned[1], kNegInf);
}

TEST(DP, ContactAccumulatorIsDerivative) {
  const auto law = build_law(1.25, kOne, 0.0, 4096);
  const auto V = gaussian_vector(3, 2000);
  const double beta = 0.3, u = -0.1, h = 1e-5;
  const double fd = (dp_solve(law, beta, u + h, V).log_Z - dp_solve(law, beta, u - h, V).log_Z) / (2 * h * beta);
  EXPECT_NEAR(dp_solve(law, beta, u, V).mean_LN, fd, 1e-5 * fd);
}

TEST(DP, AnnealedIsShiftedHomogeneous) {
  const auto law = build_law(1.5, kOne, 0.0);
  const auto p = PinningParams::from_delta(0.4, 0.1);
  const auto a = annealed_dp(law, p, 500);
  const auto b = dp_solve(law, 1.0, 0.4 * 0.1, std::vector<double>(500, 0.0));
  EXPECT_NEAR(a.log_Z, b.log_Z, 1e-12);
  const auto pre = homogeneous_log_partition_prefix(law, 0.04, 500);
  EXPECT_NEAR(pre[500], b.log_Z, 1e-12);
  EXPECT_NEAR(pre[0], 0.0, 1e-15);
  for (std::size_t n : {1ul, 17ul, 250ul})
    EXPECT_NEAR(pre[n], dp_solve(law, 1.0, 0.04, std::vector<double>(n, 0.0)).log_Z, 1e-12);
}

TEST(DP, AnnealedConvergesToAlpha0) {
  const auto law = build_law(1.5, kOne, 0.0);
  const auto p = PinningParams::from_delta(0.5, 0.2);
  const auto s = solve_annealed(law, p);
  ASSERT_TRUE(s.corr_length_M);
  const std::size_t N = static_cast<std::size_t>(50 * *s.corr_length_M);
  const double f = annealed_dp(law, p, N, {.keep_log_z = false}).log_Z / static_cast<double>(N);
  EXPECT_NEAR(f / s.alpha0, 1.0, 0.05);
}

TEST(DP, PosteriorSamplerMatchesMeanContacts) {
  const auto law = build_law(1.5, kOne, 0.0, 1024);
  const auto V = gaussian_vector(8, 40);
  const auto d = dp_solve(law, 0.8, 0.2, V);
  Xoshiro256pp rng(4);
  const int n = 20000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const auto r = sample_path(d, law, rng);
    for (std::size_t k = 1; k < r.size(); ++k) ASSERT_LT(r[k - 1], r[k]);
    if (!r.empty()) ASSERT_LE(r.back(), 40);
    s += static_cast<double>(r.size());
    s2 += static_cast<double>(r.size() * r.size());
  }
  const double m = s / n, sd = std::sqrt(s2 / n - m * m);
  EXPECT_LT(std::abs(m - d.mean_LN), 4.5 * sd / std::sqrt(n));
  const auto no_table = dp_solve(law, 0.8, 0.2, V, {.keep_log_z = false});
  EXPECT_THROW(sample_path(no_table, law, rng), std::invalid_argument);
}

TEST(DP, PosteriorSamplerMatchesEnumeratedMarginals) {
  const auto law = build_law(1.25, kOne, 0.0, 1024);
  const auto V = gaussian_vector(12, 10);
  const double beta = 0.9, u = -0.3;
  const auto d = dp_solve(law, beta, u, V);
  const auto e = enumerate_returns(law, beta, u, V);
  Xoshiro256pp rng(21);
  const int n = 40000;
  std::vector<int> hits(11, 0);
  for (int i = 0; i < n; ++i)
    for (auto r : sample_path(d, law, rng)) ++hits[r];
  for (int i = 1; i <= 10; ++i) {
    const double p = e.marginal[i];
    EXPECT_LT(std::abs(hits[i] - n * p), 4.5 * std::sqrt(n * p * (1 - p)) + 1) << "site " << i;
  }
}

TEST(QuenchedMC, DeterministicAcrossThreadCounts) {
  const auto law = build_law(1.5, kOne, 0.0);
  const auto p = PinningParams::from_delta(0.3, 0.1);
  const auto a = quenched_mc(law, p, 800, 16, 7, {.threads = 1});
  const auto b = quenched_mc(law, p, 800, 16, 7, {.threads = 5});
  ASSERT_EQ(a.replicas.size(), 16u);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_EQ(a.replicas[i].log_Z, b.replicas[i].log_Z);
    EXPECT_EQ(a.replicas[i].seed_child, child_seed(7, i));
  }
  EXPECT_EQ(a.free_energy.mean, b.free_energy.mean);
  EXPECT_NE(a.replicas[0].log_Z, a.replicas[1].log_Z);
}

TEST(QuenchedMC, ZeroDisorderReducesToHomogeneous) {
  const auto law = build_law(1.25, kOne, 0.0);
  const auto p = PinningParams::from_u(0.3, 0.05);
  const auto q = quenched_mc(law, p, 300, 4, 1, {.zero_disorder = true});
  const double ref = dp_solve(law, 0.3, 0.05, std::vector<double>(300, 0.0)).log_Z / 300;
  EXPECT_NEAR(q.free_energy.mean, ref, 1e-14);
  EXPECT_EQ(q.free_energy.std_error, 0.0);
}

TEST(QuenchedMC, JensenBound) {
  const auto law = build_law(1.75, kOne, 0.0);
  const auto p = PinningParams::from_delta(0.5, 0.1);
  const auto q = quenched_mc(law, p, 2000, 32, 3);
  const double fa = annealed_dp(law, p, 2000).log_Z / 2000;
  EXPECT_LE(q.free_energy.mean, fa + 3 * q.free_energy.std_error);
  EXPECT_THROW(quenched_mc(law, p, 10, 1, 3), std::invalid_argument);
}

TEST(Disorder, StreamsAreReproducible) {
  const auto a = DisorderRealization::make(42, 3, 100);
  const auto b = DisorderRealization::make(42, 3, 1000);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(a.values[i], b.values[i]);
  double s = 0, s2 = 0;
  for (double v : b.values) {
    s += v;
    s2 += v * v;
  }
  EXPECT_LT(std::abs(s / 1000), 0.15);
  EXPECT_NEAR(s2 / 1000, 1.0, 0.15);
}

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "pinlab/excursion_law.hpp"

using namespace pinlab;

namespace {

const SlowlyVarying kOne = SlowlyVarying::constant(1.0);

}  // namespace

TEST(ExcursionLaw, HeavyNormalizes) {
  for (double c : {1.25, 1.5, 1.75}) {
    const auto law = build_law(c, kOne, 0.0);
    double s = law.tail(5000);
    for (int n = 1; n <= 5000; ++n) s += law.pmf(n);
    EXPECT_NEAR(s, 1.0, 1e-13) << "c=" << c;
  }
}

TEST(ExcursionLaw, TailDifferencesArePmf) {
  const auto law = build_law(1.5, SlowlyVarying::log_power(1.0), 0.2, 4096);
  EXPECT_DOUBLE_EQ(law.tail(0), 1.0);
  for (std::int64_t n : {1, 2, 10, 100, 4095, 4096, 4097, 100000}) {
    const double diff = law.tail(n - 1) - law.tail(n);
    EXPECT_NEAR(diff, law.pmf(n), 1e-10 * law.pmf(n) + 2e-16) << "n=" << n;
  }
  EXPECT_GT(law.tail(10000000), 0.2);
}

TEST(ExcursionLaw, HeavyPowerLawShape) {
  const auto law = build_law(1.75, kOne, 0.0);
  for (std::int64_t n : {1, 7, 1000, 70000, 1000000})
    EXPECT_NEAR(law.pmf(n) / law.pmf(n + 1), std::pow((n + 1.0) / n, 1.75), 1e-12);
  double zeta = 0;
  for (int n = 1; n <= 2000000; ++n) zeta += std::pow(n, -1.75);
  zeta += std::pow(2000000.5, -0.75) / 0.75;
  EXPECT_NEAR(law.pmf(1), 1.0 / zeta, 1e-9);
}

TEST(ExcursionLaw, GeometricAndDeterministicClosedForms) {
  const auto g = ExcursionLaw::geometric(0.3, 0.1);
  for (int n = 1; n < 30; ++n) EXPECT_NEAR(g.pmf(n), 0.9 * 0.3 * std::pow(0.7, n - 1), 1e-15);
  EXPECT_NEAR(g.tail(5), 0.1 + 0.9 * std::pow(0.7, 5), 1e-15);
  const auto d = ExcursionLaw::deterministic(3, 0.25);
  EXPECT_EQ(d.pmf(2), 0.0);
  EXPECT_DOUBLE_EQ(d.pmf(3), 0.75);
  EXPECT_DOUBLE_EQ(d.tail(2), 1.0);
  EXPECT_DOUBLE_EQ(d.tail(3), 0.25);
}

TEST(ExcursionLaw, InvalidParametersThrow) {
  EXPECT_THROW(build_law(1.0, kOne, 0.0), std::invalid_argument);
  EXPECT_THROW(build_law(2.0, kOne, 0.0), std::invalid_argument);
  EXPECT_THROW(build_law(1.5, kOne, 1.0), std::invalid_argument);
  EXPECT_THROW(ExcursionLaw::geometric(0.0), std::invalid_argument);
  EXPECT_THROW(ExcursionLaw::deterministic(0), std::invalid_argument);
}

TEST(ExcursionLaw, MgfMatchesDirectSum) {
  for (double c : {1.25, 1.5, 1.75}) {
    const auto law = build_law(c, kOne, 0.0);
    for (double a : {0.3, 0.01, 1e-3}) {
      long double s = 0;
      const int n_max = static_cast<int>(60 / a);
      for (int n = 1; n <= n_max; ++n) s += law.pmf(n) * std::exp(-a * n);
      EXPECT_NEAR(mgf(law, a), static_cast<double>(s), 1e-11) << "c=" << c << " a=" << a;
      EXPECT_NEAR(law.one_minus_mgf(a), static_cast<double>(1.0L - s), 1e-11);
    }
  }
  const double p = 0.4, a = 0.2;
  const auto g = ExcursionLaw::geometric(p);
  const double x = std::exp(-a);
  EXPECT_NEAR(mgf(g, a), p * x / (1 - (1 - p) * x), 1e-14);
}

TEST(ExcursionLaw, OneMinusMgfSmallAlphaScaling) {
  // 1 - M(-a) is regularly varying in a with index c - 1
  const auto law = build_law(1.5, kOne, 0.0);
  const double r = law.one_minus_mgf(1e-8) / law.one_minus_mgf(1e-9);
  EXPECT_NEAR(r, std::sqrt(10.0), 1e-3);
}

TEST(ExcursionLaw, ReturnMassSolvesRenewalEquation) {
  const auto law = build_law(1.5, kOne, 0.0);
  const auto u = return_mass(law, 3000);
  std::vector<double> ref(3001, 0.0);
  ref[0] = 1;
  for (int n = 1; n <= 3000; ++n)
    for (int m = 1; m <= n; ++m) ref[n] += law.pmf(m) * ref[n - m];
  for (int n : {1, 2, 10, 500, 3000}) EXPECT_NEAR(u[n], ref[n], 1e-14);
  const auto big = return_mass(law, 20000);
  for (int n : {1, 10, 3000}) EXPECT_NEAR(big[n], ref[n], 1e-12);
  const auto g = return_mass(ExcursionLaw::geometric(0.3), 9000);
  for (int n : {1, 100, 9000}) EXPECT_NEAR(g[n], 0.3, 1e-12);
}

TEST(ExcursionLaw, Recurrentize) {
  const auto law = build_law(1.25, kOne, 0.3, 2048);
  std::string warn;
  const auto r = recurrentize(law, &warn);
  EXPECT_TRUE(warn.empty());
  EXPECT_TRUE(r.is_recurrent());
  for (int n : {1, 5, 3000}) EXPECT_NEAR(r.pmf(n), law.pmf(n) / 0.7, 1e-15);
  recurrentize(r, &warn);
  EXPECT_FALSE(warn.empty());
  EXPECT_NEAR(deterministic_critical_u(law, 0.5), -std::log(0.7) / 0.5, 1e-15);
}

TEST(ExcursionLaw, SamplerFrequencies) {
  const auto law = build_law(1.5, kOne, 0.2, 1024);
  Xoshiro256pp rng(11);
  const int n = 200000;
  int ones = 0, infs = 0, beyond = 0;
  for (int i = 0; i < n; ++i) {
    const auto e = law.sample(rng);
    if (e == 1) ++ones;
    if (e == kInfiniteExcursion) ++infs;
    else if (e > 5000) ++beyond;
  }
  auto z = [&](int k, double p) { return (k - n * p) / std::sqrt(n * p * (1 - p)); };
  EXPECT_LT(std::abs(z(ones, law.pmf(1))), 4.5);
  EXPECT_LT(std::abs(z(infs, 0.2)), 4.5);
  EXPECT_LT(std::abs(z(beyond, law.tail(5000) - 0.2)), 4.5);
}

TEST(ExcursionLaw, SpecStringRoundTrips) {
  const auto law = build_law(1.75, SlowlyVarying::log_power(2.0), 0.1, 4096);
  EXPECT_NE(law.spec_string().find("c=1.75"), std::string::npos);
}

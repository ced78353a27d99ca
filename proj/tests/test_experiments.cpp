#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "pinlab/experiments.hpp"

using namespace pinlab;

namespace {

const SlowlyVarying kOne = SlowlyVarying::constant(1.0);

}  // namespace

TEST(Experiments, RegimeGuard) {
  const std::vector<double> grid{0.1};
  EXPECT_THROW(curve_compare(ExcursionLaw::geometric(0.5), 0.2, grid, 100, 4, 1), std::invalid_argument);
  EXPECT_THROW(quadratic_bound_check(build_law(1.5, kOne, 0.0), 0.2, grid, 100, 4, 1), std::invalid_argument);
  EXPECT_THROW(transient_map_check(build_law(1.5, kOne, 0.0), 0.2, grid, std::vector<std::size_t>{100}, 4, 1),
               std::invalid_argument);
}

TEST(Experiments, CurvePointJensenAndOrdering) {
  const auto law = build_law(1.25, kOne, 0.0);
  const std::vector<double> grid{0.05, 0.1, 0.2};
  const auto r = curve_compare(law, 0.3, grid, 1024, 16, 3, {.enforce_min_N = false});
  ASSERT_EQ(r.points.size(), 3u);
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    const auto& p = r.points[i];
    EXPECT_TRUE(p.jensen_ok);
    EXPECT_EQ(p.N, 1024);
    EXPECT_FALSE(p.M.has_value());
    if (i) {
      EXPECT_GT(p.annealed_f, r.points[i - 1].annealed_f);
      EXPECT_GT(p.quenched_f.mean + 3 * p.quenched_f.std_error, r.points[i - 1].quenched_f.mean);
    }
  }
}

TEST(Experiments, CurveSkipsWhenCorrelationLengthTooLarge) {
  const auto law = build_law(1.25, kOne, 0.0);
  const std::vector<double> grid{1e-4, 2.0};
  const auto r = curve_compare(law, 0.3, grid, 256, 4, 3, {.max_N = 4096});
  EXPECT_EQ(r.points.size(), 1u);
  EXPECT_EQ(r.notices.size(), 1u);
  ASSERT_TRUE(r.points[0].M.has_value());
  EXPECT_GE(r.points[0].N, 20 * *r.points[0].M);
}

TEST(Experiments, QuadraticBoundSkipsAboveDelta2) {
  const auto law = build_law(1.75, kOne, 0.0);
  const double d2 = crossover_delta2(law, 0.2);
  const std::vector<double> grid{0.5 * d2, 2 * d2};
  const auto r = quadratic_bound_check(law, 0.2, grid, 1024, 8, 1);
  EXPECT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.notices.size(), 1u);
  EXPECT_GE(r.rows[0].slack_f, 0.0);
  EXPECT_NEAR(r.rows[0].bound_f, 0.125 * d2 * d2, 1e-15);
}

TEST(Experiments, BracketShape) {
  const auto law = build_law(1.25, kOne, 0.0);
  const std::vector<double> grid{0.01, 0.1};
  const std::vector<std::size_t> Ns{256, 512};
  const auto r = critical_bracket(law, 0.3, grid, Ns, 4, 1);
  ASSERT_EQ(r.rows.size(), 2u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.contact.size(), 2u);
    EXPECT_GT(row.theta, 0.0);
  }
  EXPECT_LE(r.delta_lo, r.delta_hi);
  const std::vector<std::size_t> one{256};
  EXPECT_THROW(critical_bracket(law, 0.3, grid, one, 4, 1), std::invalid_argument);
}

TEST(Experiments, TransientMappingSharedDisorder) {
  const auto law = build_law(1.5, kOne, 0.3, 4096);
  const double beta = 0.5;
  const double ucd = deterministic_critical_u(law, beta);
  const std::vector<double> us{ucd + 0.3};
  const std::vector<std::size_t> Ns{256, 1024};
  const auto r = transient_map_check(law, beta, us, Ns, 8, 2);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_NEAR(r.u_c_d, -std::log(0.7) / 0.5, 1e-15);
  EXPECT_EQ(r.rows[0].d.size(), 8u);
  EXPECT_GT(r.rows[0].f_transient.back(), 0.0);
  EXPECT_LT(r.rows[0].mean_d_last, r.rows[0].f_transient.back());
}

TEST(Experiments, CrossoverScaling) {
  const auto law = build_law(1.75, kOne, 0.0);
  const std::vector<double> betas{0.3, 0.2, 0.1, 0.05};
  const auto r = crossover_scaling(law, betas);
  EXPECT_NEAR(r.slope1.slope, 2.0, 0.15);
  EXPECT_NEAR(r.slope2.slope, 2.0, 0.15);
  EXPECT_LT(r.ratio_drift, 0.2);
  EXPECT_THROW(crossover_scaling(law, std::vector<double>{0.3, 0.2}), std::invalid_argument);
}

TEST(Experiments, C32Scale) {
  const auto law = build_law(1.5, kOne, 0.0);
  const std::vector<double> betas{0.5, 0.4, 0.3, 0.25, 0.2};
  const auto r = c32_scale(law, betas, 1.0);
  EXPECT_NEAR(r.fit.slope / -0.5, 1.0, 0.05);
  EXPECT_TRUE(r.strictly_decreasing);
  EXPECT_THROW(c32_scale(build_law(1.25, kOne, 0.0), betas), std::invalid_argument);
  EXPECT_THROW(c32_scale(build_law(1.5, SlowlyVarying::log_power(1.0), 0.0), betas), std::domain_error);
}

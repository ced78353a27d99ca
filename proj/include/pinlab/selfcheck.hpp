#pragma once

// Quick invariant suite behind `pinlab selfcheck`: the DP against exhaustive
// enumeration plus the solver identities.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "pinlab/annealed_solver.hpp"
#include "pinlab/enumeration.hpp"
#include "pinlab/quenched_dp.hpp"

namespace pinlab {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

inline std::vector<CheckResult> run_selfcheck(std::uint64_t seed = 20240601) {
  std::vector<CheckResult> out;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };

  std::vector<ExcursionLaw> laws{build_law(1.25, SlowlyVarying::constant(1), 0, 1000),
                                 build_law(1.5, SlowlyVarying::constant(1), 0, 1000),
                                 build_law(1.75, SlowlyVarying::log_power(1), 0.2, 1000),
                                 ExcursionLaw::geometric(0.4), ExcursionLaw::deterministic(2)};

  {
    double worst = 0;
    for (const auto& law : laws) {
      double sum = law.tail(2000);
      for (int n = 1; n <= 2000; ++n) sum += law.pmf(n);
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    out.push_back({"normalization", worst < 1e-12, "max |sum K + p_inf - 1| = " + sci(worst)});
  }

  Xoshiro256pp rng(seed);
  double worst_z = 0, worst_c = 0;
  for (int cs = 0; cs < 50; ++cs) {
    const auto& law = laws[rng() % laws.size()];
    const int N = 1 + static_cast<int>(rng() % 12);
    const double beta = 0.05 + 0.95 * rng.uniform();
    const double u = -1 + 2 * rng.uniform();
    const auto V = gaussian_vector(rng(), N);
    const auto d = dp_solve(law, beta, u, V);
    const auto e = enumerate_returns(law, beta, u, V);
    worst_z = std::max(worst_z, rel(d.log_Z, e.log_Z));
    worst_c = std::max(worst_c, rel(d.mean_LN, e.mean_LN));
  }
  out.push_back({"dp_log_partition == enumeration", worst_z < 1e-9, "max rel err " + sci(worst_z)});
  out.push_back({"dp_mean_contacts == enumeration", worst_c < 1e-9, "max rel err " + sci(worst_c)});

  {
    const auto& law = laws[1];
    const auto V = gaussian_vector(seed, 400);
    const double beta = 0.4, u = -0.1, h = 1e-5;
    const double plus = dp_solve(law, beta, u + h, V, {.keep_log_z = false}).log_Z;
    const double minus = dp_solve(law, beta, u - h, V, {.keep_log_z = false}).log_Z;
    const double fd = (plus - minus) / (2 * h) / beta;
    const double acc = dp_solve(law, beta, u, V, {.keep_log_z = false}).mean_LN;
    out.push_back({"contact accumulator == finite difference", std::abs(fd - acc) <= 1e-6 * 400,
                   "diff " + sci(std::abs(fd - acc))});
  }

  {
    double worst = 0;
    const auto law = build_law(1.5, SlowlyVarying::constant(1), 0);
    for (double bd : {1e-3, 1e-2, 0.1, 0.5}) {
      const auto s = solve_annealed(law, bd, {.with_corr_length = false});
      worst = std::max({worst, std::abs(s.residual_lhs), std::abs(s.residual_var),
                        std::abs(variational_F(law, bd, s.delta_star) - s.alpha0)});
    }
    out.push_back({"annealed identities", worst < 1e-8, "max residual " + sci(worst)});
  }
  return out;
}

}  // namespace pinlab

#pragma once

// Numerical studies built from the solver, the DP and the
// path simulator. Every routine is a pure function of its arguments and seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pinlab/annealed_solver.hpp"
#include "pinlab/excursion_law.hpp"
#include "pinlab/numerics.hpp"
#include "pinlab/parallel.hpp"
#include "pinlab/path_overlap.hpp"
#include "pinlab/quenched_dp.hpp"
#include "pinlab/slowly_varying.hpp"

namespace pinlab {

inline void require_heavy_regime(const ExcursionLaw& law, const char* who) {
  if (!law.is_heavy())
    throw std::invalid_argument(std::string(who) + ": needs a heavy-tailed law with 1 < c < 2");
}

// ---------------------------------------------------------------------------
// quenched vs annealed curves

struct CurvePoint {
  double beta = 0.0;
  double delta = 0.0;
  double annealed_f = 0.0;   // alpha0
  double annealed_c = 0.0;   // delta*
  double annealed_fN = 0.0;  // (1/N) log Z of the annealed model at the same N
  double annealed_cN = 0.0;
  EstimateWithCI quenched_f;
  EstimateWithCI quenched_c;
  std::int64_t N = 0;
  std::optional<std::int64_t> M;
  bool jensen_ok = true;     // quenched_f <= annealed_fN + 3 se

  /// Quenched over annealed free energy at the same N; undefined (NaN) when
  /// the annealed value is not positive.
  double ratio() const {
    return annealed_fN > 0 ? quenched_f.mean / annealed_fN : std::numeric_limits<double>::quiet_NaN();
  }
  double ratio_se() const {
    return annealed_fN > 0 ? quenched_f.std_error / annealed_fN : std::numeric_limits<double>::quiet_NaN();
  }
};

struct CurveOptions {
  unsigned threads = 0;
  bool enforce_min_N = true;     // raise N to 20 M (up to max_N) or skip the point
  std::size_t max_N = 1 << 16;
  std::int64_t m_cap = 10'000'000;
};

struct CurveResult {
  std::vector<CurvePoint> points;
  std::vector<std::string> notices;
};

inline CurvePoint curve_point(const ExcursionLaw& law, double beta, double delta, std::size_t N,
                              std::size_t n_replicas, std::uint64_t seed, unsigned threads,
                              std::optional<std::int64_t> M = std::nullopt) {
  const auto p = PinningParams::from_delta(beta, delta);
  const auto s = solve_annealed(law, p, {.with_corr_length = false});
  CurvePoint cp;
  cp.beta = beta;
  cp.delta = delta;
  cp.annealed_f = s.alpha0;
  cp.annealed_c = s.delta_star;
  const auto a = annealed_dp(law, p, N, {.keep_log_z = false});
  cp.annealed_fN = a.log_Z / static_cast<double>(N);
  cp.annealed_cN = a.mean_LN / static_cast<double>(N);
  const auto q = quenched_mc(law, p, N, n_replicas, seed, {.threads = threads});
  cp.quenched_f = q.free_energy;
  cp.quenched_c = q.contact;
  cp.N = static_cast<std::int64_t>(N);
  cp.M = M;
  cp.jensen_ok = cp.quenched_f.mean <= cp.annealed_fN + 3 * cp.quenched_f.std_error;
  return cp;
}

/// Annealed and quenched free energy / contact fraction along a Delta grid.
inline CurveResult curve_compare(const ExcursionLaw& law, double beta, std::span<const double> delta_grid,
                                 std::size_t N, std::size_t n_replicas, std::uint64_t seed,
                                 const CurveOptions& opt = {}) {
  require_heavy_regime(law, "curve_compare");
  CurveResult out;
  RenewalTable table(law);
  for (std::size_t g = 0; g < delta_grid.size(); ++g) {
    const double delta = delta_grid[g];
    std::optional<std::int64_t> M;
    std::size_t n_use = N;
    if (opt.enforce_min_N) {
      try {
        const auto s = solve_annealed(law, beta * delta, {.m_cap = opt.m_cap, .table = &table});
        M = s.corr_length_M;
      } catch (const CorrelationLengthCapExceeded& e) {
        out.notices.push_back("delta=" + std::to_string(delta) + " skipped: " + e.what());
        continue;
      }
      if (M) {
        const auto need = static_cast<std::size_t>(20 * *M);
        if (need > opt.max_N) {
          out.notices.push_back("delta=" + std::to_string(delta) + " skipped: N >= 20 M = " +
                                std::to_string(need) + " exceeds max_N");
          continue;
        }
        n_use = std::max(N, need);
      }
    }
    out.points.push_back(curve_point(law, beta, delta, n_use, n_replicas, seed + g, opt.threads, M));
  }
  return out;
}

// ---------------------------------------------------------------------------
// quadratic bound, c > 3/2

struct BoundRow {
  double delta = 0.0;
  double bound_f = 0.0;   // Delta^2 / 2
  double bound_c = 0.0;   // 2 Delta / beta
  double slack_f = 0.0;
  double slack_c = 0.0;
  CurvePoint point;
  bool f_ok = true;
  bool c_ok = true;
};

struct BoundReport {
  double beta = 0.0;
  double delta2 = 0.0;
  std::vector<BoundRow> rows;
  std::vector<std::string> notices;
  bool all_ok() const {
    return std::all_of(rows.begin(), rows.end(), [](const BoundRow& r) { return r.f_ok && r.c_ok; });
  }
};

/// beta f^q <= Delta^2/2 and C^q <= 2 Delta / beta for Delta <= Delta_2. The
/// finite-N slack is the excess of the V = 0 control at the same N over its
/// infinite-volume value.
inline BoundReport quadratic_bound_check(const ExcursionLaw& law, double beta,
                                         std::span<const double> delta_grid, std::size_t N,
                                         std::size_t n_replicas, std::uint64_t seed,
                                         unsigned threads = 0) {
  require_heavy_regime(law, "quadratic_bound_check");
  if (!(law.c() > 1.5)) throw std::invalid_argument("quadratic_bound_check: needs c > 3/2");
  BoundReport rep;
  rep.beta = beta;
  rep.delta2 = crossover_delta2(law, beta);
  for (std::size_t g = 0; g < delta_grid.size(); ++g) {
    const double d = delta_grid[g];
    if (d > rep.delta2) {
      rep.notices.push_back("delta=" + std::to_string(d) + " above Delta_2, not tested");
      continue;
    }
    BoundRow row;
    row.delta = d;
    row.point = curve_point(law, beta, d, N, n_replicas, seed + g, threads);
    row.bound_f = d * d / 2;
    row.bound_c = 2 * d / beta;
    row.slack_f = std::max(0.0, row.point.annealed_fN - row.point.annealed_f);
    row.slack_c = std::max(0.0, row.point.annealed_cN - row.point.annealed_c);
    row.f_ok = row.point.quenched_f.mean - 3 * row.point.quenched_f.std_error <= row.bound_f + row.slack_f;
    row.c_ok = row.point.quenched_c.mean - 3 * row.point.quenched_c.std_error <= row.bound_c + row.slack_c;
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// critical bracket

struct BracketRow {
  double delta = 0.0;
  double theta = 0.0;                  // theta_frac delta*
  std::vector<double> contact;         // quenched <L_N>/N per N in N_grid
  std::vector<double> contact_se;
  std::vector<double> quenched_f;      // mean (1/N) log Z per N
  std::vector<double> quenched_f_se;
  std::vector<double> annealed_fN;
  double extrapolated = 0.0;           // intercept of contact vs 1/N
  bool above = false;
};

struct BracketReport {
  double beta = 0.0;
  std::vector<std::size_t> N_grid;
  std::vector<BracketRow> rows;
  double delta_lo = 0.0;
  double delta_hi = std::numeric_limits<double>::infinity();
  bool monotone = true;
  std::vector<std::string> warnings;
};

/// Brackets the quenched critical Delta by where the 1/N-extrapolated
/// quenched contact fraction crosses theta_c = theta_frac delta*(beta Delta).
inline BracketReport critical_bracket(const ExcursionLaw& law, double beta,
                                      std::span<const double> delta_grid,
                                      std::span<const std::size_t> N_grid, std::size_t n_replicas,
                                      std::uint64_t seed, unsigned threads = 0,
                                      double theta_frac = 0.5) {
  require_heavy_regime(law, "critical_bracket");
  if (N_grid.size() < 2) throw std::invalid_argument("critical_bracket: need >= 2 values of N");
  BracketReport rep;
  rep.beta = beta;
  rep.N_grid.assign(N_grid.begin(), N_grid.end());
  for (std::size_t g = 0; g < delta_grid.size(); ++g) {
    BracketRow row;
    row.delta = delta_grid[g];
    const auto p = PinningParams::from_delta(beta, row.delta);
    row.theta = theta_frac * solve_annealed(law, p, {.with_corr_length = false}).delta_star;
    std::vector<double> x;
    for (std::size_t k = 0; k < N_grid.size(); ++k) {
      const auto q = quenched_mc(law, p, N_grid[k], n_replicas, seed + g, {.threads = threads});
      row.contact.push_back(q.contact.mean);
      row.contact_se.push_back(q.contact.std_error);
      row.quenched_f.push_back(q.free_energy.mean);
      row.quenched_f_se.push_back(q.free_energy.std_error);
      row.annealed_fN.push_back(annealed_dp(law, p, N_grid[k], {.keep_log_z = false}).log_Z /
                                static_cast<double>(N_grid[k]));
      x.push_back(1.0 / static_cast<double>(N_grid[k]));
    }
    row.extrapolated = linear_fit(x, row.contact).intercept;
    row.above = row.extrapolated > row.theta;
    rep.rows.push_back(row);
  }
  bool seen_above = false;
  bool found_lo = false;
  for (const auto& r : rep.rows) {
    if (r.above) {
      if (!seen_above) rep.delta_hi = r.delta;
      seen_above = true;
    } else {
      if (seen_above) rep.monotone = false;
      rep.delta_lo = std::max(found_lo ? rep.delta_lo : r.delta, r.delta);
      found_lo = true;
    }
  }
  if (!rep.monotone) {
    rep.warnings.push_back("non-monotone crossing of theta_c along the Delta grid; bracket widened");
    if (rep.delta_hi < rep.delta_lo) std::swap(rep.delta_hi, rep.delta_lo);
  }
  if (!found_lo) rep.warnings.push_back("extrapolated contact above theta_c on the whole grid");
  if (!seen_above) rep.warnings.push_back("extrapolated contact below theta_c on the whole grid");
  return rep;
}

// ---------------------------------------------------------------------------
// transient mapping

struct TransientRow {
  double u = 0.0;
  double u_recurrent = 0.0;
  std::vector<std::size_t> N_grid;
  std::vector<std::vector<double>> d;       // [replica][N]
  std::vector<double> f_transient;          // mean (1/N) log Z per N
  double fraction_decreasing = 0.0;         // replicas with d strictly decreasing along N_grid
  double mean_d_last = 0.0;
  double fit_C = 0.0;                       // max over replicas and N of d N / log N
};

struct TransientReport {
  double beta = 0.0;
  double u_c_d = 0.0;
  std::vector<TransientRow> rows;
};

/// Shared-disorder comparison of the transient model at u with its
/// recurrent counterpart at u - u_c^d.
inline TransientReport transient_map_check(const ExcursionLaw& law, double beta,
                                           std::span<const double> u_grid,
                                           std::span<const std::size_t> N_grid,
                                           std::size_t n_replicas, std::uint64_t seed,
                                           unsigned threads = 0) {
  if (law.is_recurrent()) throw std::invalid_argument("transient_map_check: law needs p_inf > 0");
  const auto rec = recurrentize(law);
  TransientReport rep;
  rep.beta = beta;
  rep.u_c_d = deterministic_critical_u(law, beta);
  const std::size_t n_max = *std::max_element(N_grid.begin(), N_grid.end());
  for (double u : u_grid) {
    TransientRow row;
    row.u = u;
    row.u_recurrent = u - rep.u_c_d;
    row.N_grid.assign(N_grid.begin(), N_grid.end());
    struct Out {
      std::vector<double> d, f;
    };
    auto outs = parallel_map<Out>(n_replicas, resolve_threads(static_cast<int>(threads)), [&](std::size_t i) {
      const auto dis = DisorderRealization::make(seed, i, n_max);
      Out o;
      for (std::size_t N : N_grid) {
        std::span<const double> V(dis.values.data(), N);
        const auto a = dp_solve(law, beta, u, V, {.keep_log_z = false});
        const auto b = dp_solve(rec, beta, row.u_recurrent, V, {.keep_log_z = false});
        const double n = static_cast<double>(N);
        o.d.push_back(std::abs(a.log_Z / n - b.log_Z / n));
        o.f.push_back(a.log_Z / n);
      }
      return o;
    });
    row.f_transient.assign(N_grid.size(), 0.0);
    std::size_t decreasing = 0;
    for (const auto& o : outs) {
      bool dec = true;
      for (std::size_t k = 0; k < N_grid.size(); ++k) {
        row.f_transient[k] += o.f[k] / static_cast<double>(n_replicas);
        if (k > 0 && !(o.d[k] < o.d[k - 1])) dec = false;
        const double n = static_cast<double>(N_grid[k]);
        row.fit_C = std::max(row.fit_C, o.d[k] * n / std::log(n));
      }
      if (dec) ++decreasing;
      row.mean_d_last += o.d.back() / static_cast<double>(n_replicas);
      row.d.push_back(o.d);
    }
    row.fraction_decreasing = static_cast<double>(decreasing) / static_cast<double>(n_replicas);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// crossover scales

struct ScaleReport {
  std::vector<double> beta_grid;
  std::vector<double> delta1;
  std::vector<double> delta2;
  LinearFit slope1;  // log Delta_1 vs log beta
  LinearFit slope2;
  double ratio_drift = 0.0;  // max/min of Delta_2/Delta_1 minus 1
};

inline ScaleReport crossover_scaling(const ExcursionLaw& law, std::span<const double> beta_grid) {
  require_heavy_regime(law, "crossover_scaling");
  if (beta_grid.size() < 4) throw std::invalid_argument("crossover_scaling: need >= 4 betas for 2 dof");
  ScaleReport r;
  r.beta_grid.assign(beta_grid.begin(), beta_grid.end());
  std::vector<double> ratio;
  for (double b : beta_grid) {
    r.delta1.push_back(crossover_delta1(law, b));
    r.delta2.push_back(crossover_delta2(law, b));
    ratio.push_back(r.delta2.back() / r.delta1.back());
  }
  r.slope1 = loglog_fit(r.beta_grid, r.delta1);
  r.slope2 = loglog_fit(r.beta_grid, r.delta2);
  const auto [mn, mx] = std::minmax_element(ratio.begin(), ratio.end());
  r.ratio_drift = *mx / *mn - 1;
  return r;
}

// ---------------------------------------------------------------------------
// c = 3/2 scale

/// Delta0_hat(beta) = phi(m) / sqrt(m), m = tilde_phi^{-1}(A / beta^2).
inline double delta0_hat(const SlowlyVarying& phi, double beta, double A = 1.0) {
  const double m = tilde_phi_inverse(phi, A / (beta * beta));
  return phi(m) / std::sqrt(m);
}

struct C32Report {
  double A = 1.0;
  std::vector<double> beta_grid;
  std::vector<double> delta0;
  LinearFit fit;              // log Delta0_hat vs 1/beta^2
  bool strictly_decreasing = true;  // as beta decreases
};

inline C32Report c32_scale(const ExcursionLaw& law, std::span<const double> beta_grid, double A = 1.0) {
  require_heavy_regime(law, "c32_scale");
  if (std::abs(law.c() - 1.5) > 1e-12) throw std::invalid_argument("c32_scale: needs c = 3/2");
  if (!law.phi().tilde_diverges())
    throw std::domain_error("c32_scale: sum 1/(n phi(n)^2) converges, so there is no Delta_0 scale");
  C32Report r;
  r.A = A;
  r.beta_grid.assign(beta_grid.begin(), beta_grid.end());
  std::vector<double> x, y;
  for (double b : beta_grid) {
    r.delta0.push_back(delta0_hat(law.phi(), b, A));
    x.push_back(1.0 / (b * b));
    y.push_back(std::log(r.delta0.back()));
  }
  r.fit = linear_fit(x, y);
  std::vector<std::size_t> order(beta_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return beta_grid[a] > beta_grid[b]; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (!(r.delta0[order[i]] < r.delta0[order[i - 1]])) r.strictly_decreasing = false;
  return r;
}

}  // namespace pinlab

#pragma once

// Free and tilted renewal paths, two-replica overlaps, and the renewal
// asymptotics checks.

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pinlab/excursion_law.hpp"
#include "pinlab/numerics.hpp"
#include "pinlab/parallel.hpp"
#include "pinlab/rng.hpp"

namespace pinlab {

struct ReturnPath {
  std::vector<std::int64_t> returns;  // tau_1 < tau_2 < ... <= N
  std::int64_t N = 0;
};

/// Concatenates i.i.d. excursions from `law` (ExcursionLaw or TiltedLaw)
/// until the horizon is passed or an infinite excursion occurs.
template <typename Law>
ReturnPath simulate_path(const Law& law, std::int64_t N, Xoshiro256pp& rng) {
  if (N < 1) throw std::invalid_argument("simulate_path: N must be >= 1");
  ReturnPath p;
  p.N = N;
  std::int64_t t = 0;
  for (;;) {
    const Excursion e = law.sample(rng);
    if (e == kInfiniteExcursion || e > N - t) break;
    t += e;
    p.returns.push_back(t);
  }
  return p;
}

/// B_N: number of common returns.
inline std::int64_t overlap(const ReturnPath& a, const ReturnPath& b) {
  if (a.N != b.N) throw std::invalid_argument("overlap: paths have different horizons");
  std::int64_t count = 0;
  auto i = a.returns.begin(), j = b.returns.begin();
  while (i != a.returns.end() && j != b.returns.end()) {
    if (*i < *j) ++i;
    else if (*j < *i) ++j;
    else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

struct OverlapSurvival {
  std::int64_t N = 0;
  std::size_t n_pairs = 0;
  std::vector<std::int64_t> B;        // per pair
  std::vector<double> survival;       // P(B >= k), k = 0..k_max
  std::size_t k_fit_max = 0;          // last k with >= kMinSurvivors pairs
  double mean_B = 0.0;
  double slope = 0.0;                 // fitted slope of log P(B >= k) over k = 1..k_fit_max
  double p_hat = 0.0;                 // 1 - exp(slope)
  bool truncated = false;             // k_max cut the survivor-supported range
};

inline constexpr std::size_t kMinSurvivors = 100;

/// Empirical survival of B_N over independent pairs and its geometric decay
/// rate. Pair i draws both paths from the stream child_seed(seed, i).
inline OverlapSurvival overlap_survival(const ExcursionLaw& law, std::int64_t N, std::size_t k_max,
                                        std::size_t n_pairs, std::uint64_t seed, unsigned threads = 0) {
  if (n_pairs < kMinSurvivors) throw std::invalid_argument("overlap_survival: need >= 100 pairs");
  OverlapSurvival r;
  r.N = N;
  r.n_pairs = n_pairs;
  r.B = parallel_map<std::int64_t>(n_pairs, resolve_threads(static_cast<int>(threads)), [&](std::size_t i) {
    Xoshiro256pp rng(child_seed(seed, i));
    const auto a = simulate_path(law, N, rng);
    const auto b = simulate_path(law, N, rng);
    return overlap(a, b);
  });
  const std::int64_t bmax = *std::max_element(r.B.begin(), r.B.end());
  const std::size_t kk = std::min<std::size_t>(k_max, static_cast<std::size_t>(bmax) + 1);
  std::vector<std::size_t> count(kk + 2, 0);
  double sum = 0.0;
  for (auto b : r.B) {
    ++count[std::min<std::size_t>(static_cast<std::size_t>(b), kk + 1)];
    sum += static_cast<double>(b);
  }
  r.mean_B = sum / static_cast<double>(n_pairs);
  r.survival.assign(kk + 1, 0.0);
  std::size_t above = n_pairs;
  std::vector<std::size_t> surv_count(kk + 1);
  for (std::size_t k = 0; k <= kk; ++k) {
    surv_count[k] = above;
    r.survival[k] = static_cast<double>(above) / static_cast<double>(n_pairs);
    above -= count[k];
  }
  std::size_t kf = 0;
  while (kf + 1 <= kk && surv_count[kf + 1] >= kMinSurvivors) ++kf;
  r.truncated = static_cast<std::int64_t>(k_max) <= bmax && surv_count[kk] >= kMinSurvivors;
  r.k_fit_max = kf;
  if (kf >= 2) {
    std::vector<double> ks, ls;
    for (std::size_t k = 1; k <= kf; ++k) {
      ks.push_back(static_cast<double>(k));
      ls.push_back(std::log(r.survival[k]));
    }
    r.slope = linear_fit(ks, ls).slope;
    r.p_hat = -std::expm1(r.slope);
  }
  return r;
}

struct OverlapVerdict {
  std::string regime;   // "stable", "log", "power"
  double statistic = 0.0;
  double target = 0.0;
  bool pass = false;
};

/// N-dependence of p_hat: stable within a factor 2 for c < 3/2, p_hat log N
/// stable within 30% at c = 3/2, log-log slope -(2c-3) +- 0.2 for c > 3/2.
inline OverlapVerdict overlap_regime_verdict(double c, std::span<const double> Ns,
                                             std::span<const double> p_hats) {
  if (Ns.size() != p_hats.size() || Ns.size() < 2)
    throw std::invalid_argument("overlap_regime_verdict: need >= 2 matching (N, p_hat) pairs");
  OverlapVerdict v;
  auto spread = [](const std::vector<double>& xs) {
    const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
    return *mn > 0 ? *mx / *mn : std::numeric_limits<double>::infinity();
  };
  if (std::abs(c - 1.5) < 1e-12) {
    std::vector<double> s;
    for (std::size_t i = 0; i < Ns.size(); ++i) s.push_back(p_hats[i] * std::log(Ns[i]));
    v.regime = "log";
    v.statistic = spread(s);
    v.target = 1.3;
    v.pass = v.statistic < v.target;
  } else if (c < 1.5) {
    v.regime = "stable";
    v.statistic = spread(std::vector<double>(p_hats.begin(), p_hats.end()));
    v.target = 2.0;
    v.pass = v.statistic < v.target;
  } else {
    v.regime = "power";
    v.target = -(2 * c - 3);
    const bool positive = std::all_of(p_hats.begin(), p_hats.end(), [](double p) { return p > 0; });
    v.statistic = positive ? loglog_fit(Ns, p_hats).slope : std::numeric_limits<double>::quiet_NaN();
    v.pass = positive && std::abs(v.statistic - v.target) <= 0.2;
  }
  return v;
}

// ---------------------------------------------------------------------------
// renewal asymptotics

struct GarsiaLampertiRow {
  std::int64_t n = 0;
  double u_n = 0.0;
  double delta_n = 0.0;
  double phi_tail = 0.0;          // tail(n) n^{c-1}
  double ratio_stated = 0.0;       // u_n / (Gamma(2-c)/Gamma(c-1) n^{-(2-c)} / phi_tail)
  double ratio_classical = 0.0;   // u_n / (n^{-(2-c)} / (Gamma(c-1) Gamma(2-c) phi_tail))
  double delta_ratio_stated = 0.0;      // delta_n vs (c-1)Gamma(2-c)/Gamma(c-1) n^{-(2-c)}/phi_pmf
  double delta_ratio_classical = 0.0;  // delta_n vs n^{-(2-c)} / (Gamma(c-1)Gamma(2-c) phi_pmf)
};

struct GarsiaLampertiReport {
  double c = 0.0;
  double stated_constant = 0.0;
  double classical_constant = 0.0;
  std::vector<GarsiaLampertiRow> rows;
};

/// u_n against the renewal-theorem asymptote at each requested n. The
/// slowly varying factor is read off the exact normalized tail.
inline GarsiaLampertiReport garsia_lamperti_check(const ExcursionLaw& law,
                                                  const std::vector<std::int64_t>& ns) {
  if (!law.is_heavy() || !law.phi().is_constant() || !law.is_recurrent())
    throw std::invalid_argument("garsia_lamperti_check: needs a recurrent heavy law with constant phi");
  const double c = law.c();
  GarsiaLampertiReport rep;
  rep.c = c;
  rep.stated_constant = boost::math::tgamma(2 - c) / boost::math::tgamma(c - 1);
  rep.classical_constant = 1.0 / (boost::math::tgamma(c - 1) * boost::math::tgamma(2 - c));
  const std::int64_t nmax = *std::max_element(ns.begin(), ns.end());
  const auto u = return_mass(law, static_cast<std::size_t>(nmax));
  std::vector<double> prefix(u.size(), 0.0);
  long double acc = 0;
  for (std::size_t i = 1; i < u.size(); ++i) {
    acc += u[i];
    prefix[i] = static_cast<double>(acc);
  }
  for (auto n : ns) {
    GarsiaLampertiRow row;
    const double dn = static_cast<double>(n);
    row.n = n;
    row.u_n = u[n];
    row.delta_n = prefix[n] / dn;
    row.phi_tail = law.tail(n) * std::pow(dn, c - 1);
    const double phi_pmf = law.pmf(n) * std::pow(dn, c);
    const double scale = std::pow(dn, -(2 - c));
    row.ratio_stated = row.u_n / (rep.stated_constant * scale / row.phi_tail);
    row.ratio_classical = row.u_n / (rep.classical_constant * scale / row.phi_tail);
    row.delta_ratio_stated = row.delta_n / ((c - 1) * rep.stated_constant * scale / phi_pmf);
    row.delta_ratio_classical = row.delta_n / (rep.classical_constant * scale / phi_pmf);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace pinlab

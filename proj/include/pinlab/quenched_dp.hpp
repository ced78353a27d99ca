#pragma once

// Finite-N partition functions of the pinning model by the renewal
// decomposition z(n) = e^{beta(u+V_n)} sum_j z(j) K(n-j), plus the contact
// accumulator, posterior path sampling and the replica Monte Carlo driver.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "pinlab/annealed_solver.hpp"
#include "pinlab/excursion_law.hpp"
#include "pinlab/numerics.hpp"
#include "pinlab/parallel.hpp"
#include "pinlab/rng.hpp"

namespace pinlab {

struct DisorderRealization {
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::uint64_t replica_index = 0;

  std::uint64_t child() const { return child_seed(seed, replica_index); }

  static DisorderRealization make(std::uint64_t seed, std::uint64_t replica, std::size_t N) {
    return {gaussian_vector(child_seed(seed, replica), N), seed, replica};
  }
  static DisorderRealization zero(std::size_t N) { return {std::vector<double>(N, 0.0), 0, 0}; }
};

struct DPResult {
  double log_Z = 0.0;
  double mean_LN = 0.0;
  std::vector<double> log_z_pinned;  // log z(0..N), z(0) = 1
  std::int64_t N = 0;
};

struct DPOptions {
  bool keep_log_z = true;
  bool force_log_domain = false;  // reference path; slower
};

namespace detail {

struct KernelTables {
  std::vector<double> K;
  std::vector<double> logK;
  std::vector<double> logT;
};

inline KernelTables kernel_tables(const ExcursionLaw& law, std::size_t N) {
  KernelTables t;
  t.K = law.pmf_vector(N);
  t.logK.resize(N + 1);
  for (std::size_t n = 0; n <= N; ++n) t.logK[n] = t.K[n] > 0 ? law.log_pmf(static_cast<std::int64_t>(n)) : kNegInf;
  const auto tail = law.tail_vector(N);
  t.logT.resize(N + 1);
  for (std::size_t n = 0; n <= N; ++n) t.logT[n] = tail[n] > 0 ? std::log(tail[n]) : kNegInf;
  return t;
}

}  // namespace detail

/// log Z_N and <L_N> for potential beta(u + V_i) at sites 1..N.
///
/// The inner sums run in linear scale relative to the running maximum G of
/// log z. A term lost to underflow there is below 1e-300, so the scaled sum
/// is exact whenever it exceeds 1e-250; otherwise that step is redone with
/// a max-shifted log-sum-exp, and after repeated misses the remainder of the
/// recursion runs in the log domain.
inline DPResult dp_solve(const ExcursionLaw& law, double beta, double u, std::span<const double> V,
                         const DPOptions& opt = {}) {
  const std::size_t N = V.size();
  if (N < 1) throw std::invalid_argument("dp: disorder length must be >= 1");
  const auto kt = detail::kernel_tables(law, N);
  const auto& K = kt.K;
  const auto& logK = kt.logK;

  std::vector<double> lz(N + 1), r(N + 1), e(N + 1);
  lz[0] = 0.0;
  r[0] = 0.0;
  e[0] = 1.0;
  double G = 0.0;
  bool log_mode = opt.force_log_domain;
  int misses = 0;

  for (std::size_t n = 1; n <= N; ++n) {
    const double w = beta * (u + V[n - 1]);
    bool done = false;
    if (!log_mode) {
      double s = 0.0, t = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p = e[j] * K[n - j];
        s += p;
        t += p * r[j];
      }
      if (s >= 1e-250) {
        lz[n] = w + G + std::log(s);
        r[n] = 1.0 + t / s;
        done = true;
        misses = 0;
      } else if (++misses > 16) {
        log_mode = true;
      }
    }
    if (!done) {
      double m = kNegInf;
      for (std::size_t j = 0; j < n; ++j) m = std::max(m, lz[j] + logK[n - j]);
      if (m == kNegInf) {
        lz[n] = kNegInf;
        r[n] = 0.0;
      } else {
        double s = 0.0, t = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double a = lz[j] + logK[n - j];
          if (a == kNegInf) continue;
          const double p = std::exp(a - m);
          s += p;
          t += p * r[j];
        }
        lz[n] = w + m + std::log(s);
        r[n] = 1.0 + t / s;
      }
    }
    if (lz[n] - G > 300.0) {
      G = lz[n];
      for (std::size_t j = 0; j < n; ++j) e[j] = std::exp(lz[j] - G);
    }
    e[n] = std::exp(lz[n] - G);
  }

  DPResult res;
  res.N = static_cast<std::int64_t>(N);
  double m = kNegInf;
  for (std::size_t j = 0; j <= N; ++j) m = std::max(m, lz[j] + kt.logT[N - j]);
  double s = 0.0, t = 0.0;
  for (std::size_t j = 0; j <= N; ++j) {
    const double a = lz[j] + kt.logT[N - j];
    if (a == kNegInf) continue;
    const double p = std::exp(a - m);
    s += p;
    t += p * r[j];
  }
  res.log_Z = m + std::log(s);
  res.mean_LN = t / s;
  if (opt.keep_log_z) res.log_z_pinned = std::move(lz);
  return res;
}

inline DPResult dp_log_partition(const ExcursionLaw& law, const PinningParams& p,
                                 const DisorderRealization& d, const DPOptions& opt = {}) {
  return dp_solve(law, p.beta, p.u, d.values, opt);
}

inline double dp_mean_contacts(const ExcursionLaw& law, const PinningParams& p,
                               const DisorderRealization& d) {
  return dp_solve(law, p.beta, p.u, d.values, {.keep_log_z = false}).mean_LN;
}

/// Annealed finite-N model: zero disorder at u + beta/2.
inline DPResult annealed_dp(const ExcursionLaw& law, const PinningParams& p, std::size_t N,
                            const DPOptions& opt = {}) {
  const std::vector<double> zero(N, 0.0);
  return dp_solve(law, p.beta, p.u + p.beta / 2, zero, opt);
}

/// log Z_n for every horizon n = 0..N of the homogeneous model with
/// contact reward beta_delta, i.e. log E[exp(beta_delta L_n)].
inline std::vector<double> homogeneous_log_partition_prefix(const ExcursionLaw& law,
                                                            double beta_delta, std::size_t N) {
  const std::vector<double> zero(N, 0.0);
  const auto res = dp_solve(law, 1.0, beta_delta, zero);
  const auto& lz = res.log_z_pinned;
  const auto kt = detail::kernel_tables(law, N);
  std::vector<double> out(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    LogSumExp acc;
    for (std::size_t j = 0; j <= n; ++j) acc.add(lz[j] + kt.logT[n - j]);
    out[n] = acc.value();
  }
  return out;
}

/// Exact posterior sample of the return set {tau_i} <= N.
inline std::vector<std::int64_t> sample_path(const DPResult& dp, const ExcursionLaw& law,
                                             Xoshiro256pp& rng) {
  const auto& lz = dp.log_z_pinned;
  if (lz.size() != static_cast<std::size_t>(dp.N) + 1)
    throw std::invalid_argument("sample_path: DPResult was computed without log_z_pinned");
  const std::size_t N = static_cast<std::size_t>(dp.N);
  const auto kt = detail::kernel_tables(law, N);
  std::vector<double> w;
  auto draw = [&](std::size_t count, std::size_t end, const std::vector<double>& lg) {
    // j in [0, count) with weight exp(lz[j] + lg[end - j])
    w.assign(count, 0.0);
    double m = kNegInf;
    for (std::size_t j = 0; j < count; ++j) m = std::max(m, lz[j] + lg[end - j]);
    double tot = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
      const double a = lz[j] + lg[end - j];
      w[j] = a == kNegInf ? 0.0 : std::exp(a - m);
      tot += w[j];
    }
    double v = rng.uniform() * tot;
    for (std::size_t j = 0; j < count; ++j) {
      v -= w[j];
      if (v < 0 && w[j] > 0) return j;
    }
    for (std::size_t j = count; j-- > 0;)
      if (w[j] > 0) return j;
    return std::size_t{0};
  };
  std::vector<std::int64_t> returns;
  std::size_t j = draw(N + 1, N, kt.logT);
  while (j > 0) {
    returns.push_back(static_cast<std::int64_t>(j));
    j = draw(j, j, kt.logK);
  }
  std::reverse(returns.begin(), returns.end());
  return returns;
}

// ---------------------------------------------------------------------------
// replica Monte Carlo

struct EstimateWithCI {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_replicas = 0;
  std::vector<double> per_replica;

  static EstimateWithCI from(std::vector<double> xs) {
    EstimateWithCI e;
    e.n_replicas = xs.size();
    if (xs.empty()) return e;
    double s = 0.0;
    for (double x : xs) s += x;
    e.mean = s / static_cast<double>(xs.size());
    if (xs.size() > 1) {
      double ss = 0.0;
      for (double x : xs) ss += (x - e.mean) * (x - e.mean);
      e.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    }
    e.per_replica = std::move(xs);
    return e;
  }
  double sample_std() const { return std_error * std::sqrt(static_cast<double>(n_replicas)); }
};

struct ReplicaRecord {
  std::uint64_t replica = 0;
  std::uint64_t seed_child = 0;
  std::int64_t N = 0;
  double log_Z = 0.0;
  double mean_LN = 0.0;
};

struct QuenchedEstimate {
  EstimateWithCI free_energy;  // (1/N) log Z
  EstimateWithCI contact;      // <L_N> / N
  std::vector<ReplicaRecord> replicas;
};

struct QuenchedOptions {
  unsigned threads = 0;
  bool zero_disorder = false;  // test hook: V = 0 in every replica
};

inline QuenchedEstimate quenched_mc(const ExcursionLaw& law, const PinningParams& p, std::size_t N,
                                    std::size_t n_replicas, std::uint64_t seed,
                                    const QuenchedOptions& opt = {}) {
  if (n_replicas < 2) throw std::invalid_argument("quenched_mc: n_replicas must be >= 2");
  auto recs = parallel_map<ReplicaRecord>(n_replicas, resolve_threads(static_cast<int>(opt.threads)),
                                          [&](std::size_t i) {
    const auto d = opt.zero_disorder ? DisorderRealization::zero(N)
                                     : DisorderRealization::make(seed, i, N);
    const auto r = dp_solve(law, p.beta, p.u, d.values, {.keep_log_z = false});
    return ReplicaRecord{i, child_seed(seed, i), static_cast<std::int64_t>(N), r.log_Z, r.mean_LN};
  });
  std::vector<double> f, c;
  for (const auto& r : recs) {
    f.push_back(r.log_Z / static_cast<double>(N));
    c.push_back(r.mean_LN / static_cast<double>(N));
  }
  return {EstimateWithCI::from(std::move(f)), EstimateWithCI::from(std::move(c)), std::move(recs)};
}

}  // namespace pinlab

#pragma once

// Annealed (= deterministic, for Gaussian disorder) thermodynamics through
// the large-deviation variational formula over the excursion law.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pinlab/excursion_law.hpp"
#include "pinlab/numerics.hpp"

namespace pinlab {

/// (beta, u) with Delta = u + beta/2, the Gaussian shift log M_V(beta) = beta^2/2.
struct PinningParams {
  double beta = 1.0;
  double u = 0.0;

  static PinningParams from_u(double beta, double u) {
    if (!(beta > 0)) throw std::invalid_argument("beta must be > 0");
    return {beta, u};
  }
  static PinningParams from_delta(double beta, double delta) {
    if (!(beta > 0)) throw std::invalid_argument("beta must be > 0");
    return {beta, delta - beta / 2};
  }
  double delta() const { return u + beta / 2; }
  double beta_delta() const { return beta * delta(); }
};

class CorrelationLengthCapExceeded : public std::runtime_error {
 public:
  CorrelationLengthCapExceeded(double predicted, std::int64_t cap)
      : std::runtime_error("correlation length M ~ " + std::to_string(predicted) +
                           " exceeds the cap " + std::to_string(cap)),
        predicted_(predicted) {}
  double predicted() const { return predicted_; }

 private:
  double predicted_;
};

struct AnnealedSolution {
  double beta_delta = 0.0;
  double alpha0 = 0.0;
  double delta_star = 0.0;
  /// Empty when not computed, or in the unpinned phase (M = infinity).
  std::optional<std::int64_t> corr_length_M;
  double residual_lhs = 0.0;  // beta Delta + log M_E(-alpha0)
  double residual_var = 0.0;  // (log M_E)'(-alpha0) delta* - 1
  bool pinned = false;

  double free_energy() const { return alpha0; }
};

struct RateValue {
  double value = 0.0;
  double x0 = 0.0;
};

// ---------------------------------------------------------------------------
// rate function

/// I_E(t) = sup_{x<=0} (t x - log M_E(x)) and its maximizer.
inline RateValue rate_function(const ExcursionLaw& law, double t) {
  if (!(t > 1.0) && !(t == 1.0 && law.min_support() == 1))
    throw std::invalid_argument("rate_function: t must be > 1, got " + std::to_string(t));
  const double kmin = static_cast<double>(law.min_support());
  if (t < kmin)
    throw std::invalid_argument("rate_function: t below the minimum excursion length " +
                                std::to_string(law.min_support()));
  if (t == 1.0) return {-std::log(law.pmf(1)), -std::numeric_limits<double>::infinity()};
  if (law.kind() == ExcursionLaw::Kind::Deterministic) return {-std::log1p(-law.p_inf()), 0.0};
  if (law.has_finite_mean() && t >= log_mgf_deriv(law, 0.0, 1)) return {0.0, 0.0};

  auto g = [&](double a) { return log_mgf_deriv(law, a, 1) - t; };
  double lo = 1e-12;
  while (g(lo) <= 0) {
    lo *= 1e-3;
    if (lo < 1e-300) return {-std::log1p(-law.p_inf()), 0.0};
  }
  double hi = 1.0;
  while (g(hi) >= 0) hi *= 2.0;
  const double a = bisect(g, lo, hi, 1e-14);
  return {-t * a - log_mgf(law, a), -a};
}

/// F(delta) = beta Delta delta - delta I_E(1/delta), delta in (0, 1].
inline double variational_F(const ExcursionLaw& law, double beta_delta, double delta) {
  if (!(delta > 0 && delta <= 1)) throw std::invalid_argument("variational_F: delta must lie in (0, 1]");
  return beta_delta * delta - delta * rate_function(law, 1.0 / delta).value;
}

// ---------------------------------------------------------------------------
// correlation length

/// Renewal mass u_n with prefix sums, grown on demand. Not thread-safe;
/// use one table per worker or fill it before sharing.
class RenewalTable {
 public:
  explicit RenewalTable(ExcursionLaw law) : law_(std::move(law)) {}

  const ExcursionLaw& law() const { return law_; }
  std::size_t size() const { return u_.empty() ? 0 : u_.size() - 1; }

  void ensure(std::size_t n) {
    if (n <= size()) return;
    u_ = return_mass(law_, n);
    prefix_.assign(u_.size(), 0.0);
    long double acc = 0;
    for (std::size_t i = 1; i < u_.size(); ++i) {
      acc += u_[i];
      prefix_[i] = static_cast<double>(acc);
    }
  }

  std::span<const double> u() const { return u_; }
  /// delta_n = (1/n) sum_{i<=n} u_i.
  double delta_n(std::size_t n) const { return prefix_[n] / static_cast<double>(n); }

 private:
  ExcursionLaw law_;
  std::vector<double> u_;
  std::vector<double> prefix_;
};

/// Heuristic size of M from the renewal asymptotics, used to size the table
/// and to refuse hopeless requests.
inline double predicted_corr_length(const ExcursionLaw& law, double delta_star) {
  if (!law.is_heavy()) return 1.0;
  const double c = law.c();
  const double k = std::sin(std::numbers::pi * (c - 1)) / (std::numbers::pi * (c - 1));
  double n = 1000.0;
  for (int it = 0; it < 4; ++it) {
    const double phi_eff = law.phi()(n) * (1 - law.p_inf()) / (law.norm() * (c - 1));
    n = std::pow(k / (phi_eff * delta_star), 1.0 / (2 - c));
    n = std::max(n, 1.0);
  }
  return n;
}

/// M = min{n >= 1 : delta_n <= delta*}, by doubling the renewal table.
inline std::int64_t correlation_length(RenewalTable& table, double delta_star,
                                       std::int64_t cap = 10'000'000) {
  const double pred = predicted_corr_length(table.law(), delta_star);
  if (pred > 2.0 * static_cast<double>(cap)) throw CorrelationLengthCapExceeded(pred, cap);
  std::size_t n_scan = 1;
  std::size_t len = std::max<std::size_t>(1024, static_cast<std::size_t>(std::min(1.5 * pred, 1e18)));
  len = std::min<std::size_t>(len, static_cast<std::size_t>(cap));
  for (;;) {
    table.ensure(len);
    for (; n_scan <= table.size(); ++n_scan)
      if (table.delta_n(n_scan) <= delta_star) return static_cast<std::int64_t>(n_scan);
    if (table.size() >= static_cast<std::size_t>(cap)) throw CorrelationLengthCapExceeded(pred, cap);
    len = std::min<std::size_t>(2 * table.size(), static_cast<std::size_t>(cap));
  }
}

// ---------------------------------------------------------------------------
// solver

struct AnnealedOptions {
  bool with_corr_length = true;
  std::int64_t m_cap = 10'000'000;
  RenewalTable* table = nullptr;  // reused across solves when given
};

/// alpha0 > 0 solving beta Delta + log M_E(-alpha0) = 0.
inline double solve_alpha0(const ExcursionLaw& law, double beta_delta) {
  auto h = [&](double a) { return beta_delta + log_mgf(law, a); };
  double hi = std::max(1e-6, beta_delta);
  while (h(hi) >= 0) hi *= 2.0;
  double lo = hi;
  do {
    lo *= 0.5;
    if (lo < 1e-300) throw std::domain_error("solve_alpha0: no positive root");
  } while (h(lo) <= 0);
  return bisect(h, lo, hi, 1e-14);
}

inline AnnealedSolution solve_annealed(const ExcursionLaw& law, double beta_delta,
                                       const AnnealedOptions& opt = {}) {
  if (!law.is_recurrent())
    throw std::invalid_argument("solve_annealed: law has a defect mass; recurrentize it first");
  AnnealedSolution s;
  s.beta_delta = beta_delta;
  if (!(beta_delta > 0)) return s;
  s.pinned = true;
  s.alpha0 = solve_alpha0(law, beta_delta);
  const double dlog = log_mgf_deriv(law, s.alpha0, 1);
  s.delta_star = 1.0 / dlog;
  s.residual_lhs = beta_delta + log_mgf(law, s.alpha0);
  s.residual_var = dlog * s.delta_star - 1.0;
  if (opt.with_corr_length) {
    if (opt.table) {
      s.corr_length_M = correlation_length(*opt.table, s.delta_star, opt.m_cap);
    } else {
      RenewalTable t(law);
      s.corr_length_M = correlation_length(t, s.delta_star, opt.m_cap);
    }
  }
  return s;
}

inline AnnealedSolution solve_annealed(const ExcursionLaw& law, const PinningParams& p,
                                       const AnnealedOptions& opt = {}) {
  return solve_annealed(law, p.beta_delta(), opt);
}

inline double annealed_contact_fraction(const AnnealedSolution& s) { return s.delta_star; }

/// delta_0: the root of F(delta) = 0 above delta*, i.e. I_E(1/delta_0) = beta Delta.
inline double solve_delta0(const ExcursionLaw& law, double beta_delta) {
  const auto s = solve_annealed(law, beta_delta, {.with_corr_length = false});
  if (!s.pinned) throw std::domain_error("solve_delta0: unpinned");
  auto F = [&](double d) { return variational_F(law, beta_delta, d); };
  if (F(1.0) >= 0) throw std::domain_error("solve_delta0: F(1) >= 0, no root in (delta*, 1)");
  return bisect(F, s.delta_star, 1.0, 1e-13);
}

struct FScan {
  std::vector<double> grid;
  std::vector<double> F;
  std::size_t argmax = 0;
  double max_second_diff = -std::numeric_limits<double>::infinity();
};

/// F on a grid (ascending, within (0, 1]); concavity shows as nonpositive
/// second differences.
inline FScan scan_F(const ExcursionLaw& law, double beta_delta, std::vector<double> grid) {
  FScan r;
  r.grid = std::move(grid);
  r.F.resize(r.grid.size());
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    r.F[i] = variational_F(law, beta_delta, r.grid[i]);
    if (r.F[i] > r.F[r.argmax]) r.argmax = i;
  }
  for (std::size_t i = 1; i + 1 < r.grid.size(); ++i)
    r.max_second_diff = std::max(r.max_second_diff, r.F[i + 1] - 2 * r.F[i] + r.F[i - 1]);
  return r;
}

// ---------------------------------------------------------------------------
// crossovers

/// Delta_1: delta*(beta Delta) = 2 Delta / beta.
inline double crossover_delta1(const ExcursionLaw& law, double beta, double lo = 1e-8,
                               double hi = 10.0) {
  auto g = [&](double d) {
    return solve_annealed(law, beta * d, {.with_corr_length = false}).delta_star - 2 * d / beta;
  };
  return bisect(g, lo, hi, 1e-8);
}

/// Delta_2: alpha0(beta Delta) = Delta^2 / 2.
inline double crossover_delta2(const ExcursionLaw& law, double beta, double lo = 1e-8,
                               double hi = 10.0) {
  auto h = [&](double d) {
    return solve_annealed(law, beta * d, {.with_corr_length = false}).alpha0 - d * d / 2;
  };
  return bisect(h, lo, hi, 1e-8);
}

struct ExponentReport {
  LinearFit free_energy;  // log alpha0 vs log(beta Delta)
  LinearFit contact;      // log delta* vs log(beta Delta)
  double expected_free_energy = 0.0;
  double expected_contact = 0.0;
  std::string warning;
};

/// Log-log slopes of alpha0 and delta* against beta Delta.
inline ExponentReport annealed_exponents(const ExcursionLaw& law,
                                          std::span<const double> beta_delta_grid) {
  if (!law.is_heavy())
    throw std::invalid_argument("annealed_exponents: needs a heavy-tailed law with 1 < c < 2");
  if (beta_delta_grid.size() < 3) throw std::invalid_argument("annealed_exponents: grid too small");
  const auto [mn, mx] = std::minmax_element(beta_delta_grid.begin(), beta_delta_grid.end());
  if (*mx > 0.1 * (1 + 1e-12) || *mn <= 0 || *mx / *mn < 100 * (1 - 1e-12))
    throw std::invalid_argument("annealed_exponents: grid must span >= 2 decades within (0, 0.1]");
  ExponentReport r;
  if (!law.phi().is_constant())
    r.warning = "phi is not constant: fitted slopes include slowly varying corrections";
  std::vector<double> a, d;
  for (double bd : beta_delta_grid) {
    const auto s = solve_annealed(law, bd, {.with_corr_length = false});
    a.push_back(s.alpha0);
    d.push_back(s.delta_star);
  }
  r.free_energy = loglog_fit(beta_delta_grid, a);
  r.contact = loglog_fit(beta_delta_grid, d);
  r.expected_free_energy = 1.0 / (law.c() - 1);
  r.expected_contact = (2 - law.c()) / (law.c() - 1);
  return r;
}

}  // namespace pinlab

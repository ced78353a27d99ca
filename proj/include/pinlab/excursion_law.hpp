#pragma once

// Excursion-length laws K(n) = P(E_1 = n) of the renewal skeleton of returns
// to the defect site, their moment generating function, renewal mass and
// samplers.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pinlab/convolution.hpp"
#include "pinlab/numerics.hpp"
#include "pinlab/rng.hpp"
#include "pinlab/slowly_varying.hpp"

namespace pinlab {

/// Excursion length; kInfiniteExcursion marks a walk that never returns.
using Excursion = std::int64_t;
inline constexpr Excursion kInfiniteExcursion = std::numeric_limits<Excursion>::max();

/// Sums S_k(alpha) = sum_n n^k e^{-alpha n} K(n) for k = 0, 1, 2.
struct Moments {
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
};

class ExcursionLaw {
 public:
  enum class Kind { HeavyTail, Geometric, Deterministic };

  static constexpr std::size_t kDefaultTable = 65536;

  /// K(n) = (1 - p_inf) n^{-c} phi(n) / norm, 1 < c < 2.
  static ExcursionLaw heavy(double c, SlowlyVarying phi, double p_inf = 0.0,
                            std::size_t n_table = kDefaultTable);
  /// K(n) = (1 - p_inf) p (1-p)^{n-1}.
  static ExcursionLaw geometric(double p, double p_inf = 0.0);
  /// K(k) = 1 - p_inf.
  static ExcursionLaw deterministic(std::int64_t k, double p_inf = 0.0);

  Kind kind() const { return kind_; }
  bool is_heavy() const { return kind_ == Kind::HeavyTail; }
  double c() const { return c_; }
  const SlowlyVarying& phi() const { return phi_; }
  double p_inf() const { return p_inf_; }
  double norm() const { return norm_; }
  double geometric_p() const { return geo_p_; }
  std::int64_t deterministic_k() const { return det_k_; }
  std::size_t n_table() const { return tables_->pmf.size() - 1; }
  bool is_recurrent() const { return p_inf_ == 0.0; }
  bool has_finite_mean() const { return kind_ != Kind::HeavyTail && is_recurrent(); }
  std::int64_t min_support() const { return kind_ == Kind::Deterministic ? det_k_ : 1; }

  double pmf(std::int64_t n) const;
  double log_pmf(std::int64_t n) const;
  /// P(E_1 > n), including the mass at infinity; tail(0) = 1.
  double tail(std::int64_t n) const;
  double log_tail(std::int64_t n) const { return std::log(tail(n)); }

  /// K(0..n_table), K(0) = 0.
  std::span<const double> pmf_table() const { return tables_->pmf; }
  /// tail(0..n_table).
  std::span<const double> tail_table() const { return tables_->tail; }

  std::vector<double> pmf_vector(std::size_t n_max) const;
  std::vector<double> tail_vector(std::size_t n_max) const;

  Moments moments(double alpha) const;
  /// 1 - M_E(-alpha), computed without cancellation for small alpha.
  double one_minus_mgf(double alpha) const;

  /// Inversion sampling. Beyond the table the heavy tail is drawn from the
  /// Pareto approximation n_table * V^{-1/(c-1)} rounded up.
  Excursion sample(Xoshiro256pp& rng) const;

  /// Config-file form, e.g. heavy(c=1.5, phi=const(1), p_inf=0).
  std::string spec_string() const;

  /// Heavy-tail terms n^{s} e^{-alpha x} phi(x) summed over n >= a
  /// (unnormalized), by Euler-Maclaurin around the tail integral.
  double heavy_tail_sum(double a, double alpha, int k) const;

 private:
  struct Tables {
    std::vector<double> pmf;
    std::vector<double> tail;
  };

  ExcursionLaw() = default;
  double heavy_unnormalized(double x) const {
    return std::exp(-c_ * std::log(x) + phi_.log_value(x));
  }
  double heavy_tail_integral(double a, double alpha, int k) const;
  double heavy_one_minus_tail(double a, double alpha) const;

  Kind kind_ = Kind::HeavyTail;
  double c_ = 0.0;
  SlowlyVarying phi_ = SlowlyVarying::constant(1.0);
  double p_inf_ = 0.0;
  double norm_ = 1.0;
  double geo_p_ = 0.0;
  std::int64_t det_k_ = 0;
  std::shared_ptr<const Tables> tables_;
};

// ---------------------------------------------------------------------------
// construction

namespace detail {

inline void check_defect(double p_inf) {
  if (!(p_inf >= 0.0) || !(p_inf < 1.0))
    throw std::invalid_argument("p_inf must lie in [0, 1), got " + std::to_string(p_inf));
}

// Number of explicitly summed terms in series evaluations; the remainder is
// handled by Euler-Maclaurin, which is accurate to ~1e-16 at this offset.
inline constexpr std::int64_t kExplicitTerms = 1024;

}  // namespace detail

inline ExcursionLaw ExcursionLaw::heavy(double c, SlowlyVarying phi, double p_inf,
                                        std::size_t n_table) {
  detail::check_defect(p_inf);
  if (!(c > 1.0)) {
    throw std::invalid_argument(
        "heavy-tailed law needs c > 1: n^{-c} phi(n) is not normalizable for c = " +
        std::to_string(c) + (p_inf == 0.0 ? " without a defect mass" : ""));
  }
  if (!(c < 2.0)) {
    throw std::invalid_argument("heavy-tailed law needs c < 2 (got " + std::to_string(c) +
                                "); use geometric() or deterministic() as finite-mean test laws");
  }
  if (n_table < 1000) throw std::invalid_argument("n_table must be >= 1000");

  ExcursionLaw law;
  law.kind_ = Kind::HeavyTail;
  law.c_ = c;
  law.phi_ = phi;
  law.p_inf_ = p_inf;

  std::vector<double> raw(n_table + 1, 0.0);
  for (std::size_t n = 1; n <= n_table; ++n) raw[n] = law.heavy_unnormalized(static_cast<double>(n));
  const double rest = law.heavy_tail_sum(static_cast<double>(n_table + 1), 0.0, 0);
  // sum the head smallest-first
  double head = 0.0;
  for (std::size_t n = n_table; n >= 1; --n) head += raw[n];
  law.norm_ = head + rest;

  auto t = std::make_shared<Tables>();
  const double scale = (1.0 - p_inf) / law.norm_;
  t->pmf.resize(n_table + 1);
  t->tail.resize(n_table + 1);
  t->pmf[0] = 0.0;
  for (std::size_t n = 1; n <= n_table; ++n) t->pmf[n] = raw[n] * scale;
  double acc = rest * scale;
  t->tail[n_table] = p_inf + acc;
  for (std::size_t n = n_table; n >= 1; --n) {
    acc += t->pmf[n];
    t->tail[n - 1] = p_inf + acc;
  }
  t->tail[0] = 1.0;
  law.tables_ = std::move(t);
  return law;
}

inline ExcursionLaw ExcursionLaw::geometric(double p, double p_inf) {
  detail::check_defect(p_inf);
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("geometric(p) needs 0 < p <= 1");
  ExcursionLaw law;
  law.kind_ = Kind::Geometric;
  law.geo_p_ = p;
  law.p_inf_ = p_inf;
  law.c_ = std::numeric_limits<double>::infinity();
  auto t = std::make_shared<Tables>();
  const std::size_t n = 1024;
  t->pmf.resize(n + 1);
  t->tail.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    t->pmf[i] = law.pmf(static_cast<std::int64_t>(i));
    t->tail[i] = law.tail(static_cast<std::int64_t>(i));
  }
  law.tables_ = std::move(t);
  return law;
}

inline ExcursionLaw ExcursionLaw::deterministic(std::int64_t k, double p_inf) {
  detail::check_defect(p_inf);
  if (k < 1) throw std::invalid_argument("deterministic(k) needs k >= 1");
  ExcursionLaw law;
  law.kind_ = Kind::Deterministic;
  law.det_k_ = k;
  law.p_inf_ = p_inf;
  law.c_ = std::numeric_limits<double>::infinity();
  auto t = std::make_shared<Tables>();
  const std::size_t n = std::max<std::size_t>(1024, static_cast<std::size_t>(k));
  t->pmf.resize(n + 1);
  t->tail.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    t->pmf[i] = law.pmf(static_cast<std::int64_t>(i));
    t->tail[i] = law.tail(static_cast<std::int64_t>(i));
  }
  law.tables_ = std::move(t);
  return law;
}

// ---------------------------------------------------------------------------
// point evaluation

inline double ExcursionLaw::pmf(std::int64_t n) const {
  if (n < 1) return 0.0;
  switch (kind_) {
    case Kind::HeavyTail:
      if (static_cast<std::size_t>(n) < tables_->pmf.size()) return tables_->pmf[n];
      return (1.0 - p_inf_) * heavy_unnormalized(static_cast<double>(n)) / norm_;
    case Kind::Geometric:
      return (1.0 - p_inf_) * geo_p_ * std::pow(1.0 - geo_p_, static_cast<double>(n - 1));
    case Kind::Deterministic:
      return n == det_k_ ? 1.0 - p_inf_ : 0.0;
  }
  return 0.0;
}

inline double ExcursionLaw::log_pmf(std::int64_t n) const {
  if (kind_ == Kind::HeavyTail && n >= 1) {
    return std::log1p(-p_inf_) - c_ * std::log(static_cast<double>(n)) +
           phi_.log_value(static_cast<double>(n)) - std::log(norm_);
  }
  const double p = pmf(n);
  return p > 0 ? std::log(p) : kNegInf;
}

inline double ExcursionLaw::tail(std::int64_t n) const {
  if (n <= 0) return 1.0;
  switch (kind_) {
    case Kind::HeavyTail:
      if (static_cast<std::size_t>(n) < tables_->tail.size()) return tables_->tail[n];
      return p_inf_ +
             (1.0 - p_inf_) * heavy_tail_sum(static_cast<double>(n + 1), 0.0, 0) / norm_;
    case Kind::Geometric:
      return p_inf_ + (1.0 - p_inf_) * std::pow(1.0 - geo_p_, static_cast<double>(n));
    case Kind::Deterministic:
      return n < det_k_ ? 1.0 : p_inf_;
  }
  return 0.0;
}

inline std::vector<double> ExcursionLaw::pmf_vector(std::size_t n_max) const {
  std::vector<double> v(n_max + 1);
  for (std::size_t n = 0; n <= n_max; ++n) v[n] = pmf(static_cast<std::int64_t>(n));
  return v;
}

inline std::vector<double> ExcursionLaw::tail_vector(std::size_t n_max) const {
  std::vector<double> v(n_max + 1);
  const std::size_t in_table = std::min(n_max + 1, tables_->tail.size());
  std::copy_n(tables_->tail.begin(), in_table, v.begin());
  if (n_max + 1 > in_table) {
    // continue downward from the far end so that only one tail evaluation is needed
    double acc = tail(static_cast<std::int64_t>(n_max)) - p_inf_;
    v[n_max] = p_inf_ + acc;
    for (std::size_t n = n_max; n > in_table; --n) {
      acc += pmf(static_cast<std::int64_t>(n));
      v[n - 1] = p_inf_ + acc;
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// heavy-tail series remainders

inline double ExcursionLaw::heavy_tail_integral(double a, double alpha, int k) const {
  // integral_a^inf x^{k-c} e^{-alpha x} phi(x) dx
  if (phi_.is_constant()) {
    const double phi_a = phi_.param();
    const double s = k + 1 - c_;
    if (alpha == 0.0) {
      if (s >= 0) return std::numeric_limits<double>::infinity();
      return phi_a * std::pow(a, s) / (-s);
    }
    const double z = alpha * a;
    if (z > 700) return 0.0;
    double gamma_upper;
    if (s > 0) {
      gamma_upper = boost::math::tgamma(s, z);
    } else {
      // Gamma(s, z) = (Gamma(s+1, z) - z^s e^{-z}) / s for s in (-1, 0)
      gamma_upper = (std::exp(s * std::log(z) - z) - boost::math::tgamma(s + 1, z)) / (-s);
    }
    return phi_a * std::pow(alpha, -s) * gamma_upper;
  }
  if (alpha == 0.0 && k + 1 - c_ >= 0) return std::numeric_limits<double>::infinity();
  auto f = [&](double x) {
    return std::exp((k - c_) * std::log(x) - alpha * x + phi_.log_value(x));
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([&](double t) { return f(a + t); }, 1e-14);
}

inline double ExcursionLaw::heavy_tail_sum(double a, double alpha, int k) const {
  if (alpha * a > 745) return 0.0;
  const double s = k - c_;
  const double f = std::exp(s * std::log(a) - alpha * a + phi_.log_value(a));
  const double g1 = s / a - alpha + phi_.log_deriv(a, 1);
  const double g2 = -s / (a * a) + phi_.log_deriv(a, 2);
  const double g3 = 2 * s / (a * a * a) + phi_.log_deriv(a, 3);
  const double f1 = f * g1;
  const double f3 = f * (g1 * g1 * g1 + 3 * g1 * g2 + g3);
  return heavy_tail_integral(a, alpha, k) + 0.5 * f - f1 / 12.0 + f3 / 720.0;
}

inline double ExcursionLaw::heavy_one_minus_tail(double a, double alpha) const {
  // sum_{n >= a} (1 - e^{-alpha n}) n^{-c} phi(n)
  if (alpha == 0.0) return 0.0;
  double integral;
  if (phi_.is_constant()) {
    integral = -std::expm1(-alpha * a) * phi_.param() * std::pow(a, 1 - c_) / (c_ - 1) +
               alpha / (c_ - 1) * heavy_tail_integral(a, alpha, 1);
  } else {
    auto f = [&](double x) {
      return -std::expm1(-alpha * x) * std::exp(-c_ * std::log(x) + phi_.log_value(x));
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    integral = integrator.integrate([&](double t) { return f(a + t); }, 1e-14);
  }
  const double w = -std::expm1(-alpha * a);
  const double e = std::exp(-alpha * a);
  const double f0 = std::exp(-c_ * std::log(a) + phi_.log_value(a));
  const double h1 = -c_ / a + phi_.log_deriv(a, 1);
  const double h2 = c_ / (a * a) + phi_.log_deriv(a, 2);
  const double h3 = -2 * c_ / (a * a * a) + phi_.log_deriv(a, 3);
  const double f0p = f0 * h1;
  const double f0ppp = f0 * (h1 * h1 * h1 + 3 * h1 * h2 + h3);
  // derivatives of F(x) = (1 - e^{-alpha x}) f0(x)
  const double F1 = alpha * e * f0 + w * f0p;
  const double g1 = h1 - alpha;
  const double fa3 = e * f0 * (g1 * g1 * g1 + 3 * g1 * h2 + h3);
  const double F3 = f0ppp - fa3;
  return integral + 0.5 * w * f0 - F1 / 12.0 + F3 / 720.0;
}

// ---------------------------------------------------------------------------
// generating function

inline Moments ExcursionLaw::moments(double alpha) const {
  if (!(alpha >= 0.0)) throw std::invalid_argument("moments: alpha must be >= 0");
  Moments m;
  const double mass = 1.0 - p_inf_;
  switch (kind_) {
    case Kind::Geometric: {
      const double ea = std::exp(-alpha);
      const double w = (1.0 - geo_p_) * ea;
      const double base = mass * geo_p_ * ea;
      m.s0 = base / (1 - w);
      m.s1 = base / ((1 - w) * (1 - w));
      m.s2 = base * (1 + w) / ((1 - w) * (1 - w) * (1 - w));
      return m;
    }
    case Kind::Deterministic: {
      const double k = static_cast<double>(det_k_);
      m.s0 = mass * std::exp(-alpha * k);
      m.s1 = k * m.s0;
      m.s2 = k * m.s1;
      return m;
    }
    case Kind::HeavyTail:
      break;
  }
  const auto& pmf_t = tables_->pmf;
  const std::int64_t n_explicit =
      std::min<std::int64_t>(detail::kExplicitTerms, static_cast<std::int64_t>(pmf_t.size()) - 1);
  double e = 1.0;
  const double step = std::exp(-alpha);
  // summed smallest-first would need a second pass; the terms here decay so
  // forward summation in long double is enough
  long double a0 = 0, a1 = 0, a2 = 0;
  for (std::int64_t n = 1; n <= n_explicit; ++n) {
    if ((n & 63) == 1) e = std::exp(-alpha * static_cast<double>(n));
    else e *= step;
    const double t = e * pmf_t[n];
    const double dn = static_cast<double>(n);
    a0 += t;
    a1 += t * dn;
    a2 += t * dn * dn;
  }
  const double a = static_cast<double>(n_explicit + 1);
  const double scale = mass / norm_;
  m.s0 = static_cast<double>(a0) + scale * heavy_tail_sum(a, alpha, 0);
  if (alpha == 0.0) {
    m.s1 = m.s2 = std::numeric_limits<double>::infinity();
  } else {
    m.s1 = static_cast<double>(a1) + scale * heavy_tail_sum(a, alpha, 1);
    m.s2 = static_cast<double>(a2) + scale * heavy_tail_sum(a, alpha, 2);
  }
  return m;
}

inline double ExcursionLaw::one_minus_mgf(double alpha) const {
  if (!(alpha >= 0.0)) throw std::invalid_argument("one_minus_mgf: alpha must be >= 0");
  const double mass = 1.0 - p_inf_;
  switch (kind_) {
    case Kind::Geometric: {
      const double w = (1.0 - geo_p_) * std::exp(-alpha);
      return p_inf_ + mass * (-std::expm1(-alpha)) / (1 - w);
    }
    case Kind::Deterministic:
      return p_inf_ + mass * (-std::expm1(-alpha * static_cast<double>(det_k_)));
    case Kind::HeavyTail:
      break;
  }
  const auto& pmf_t = tables_->pmf;
  const std::int64_t n_explicit =
      std::min<std::int64_t>(detail::kExplicitTerms, static_cast<std::int64_t>(pmf_t.size()) - 1);
  long double acc = 0;
  for (std::int64_t n = 1; n <= n_explicit; ++n)
    acc += -std::expm1(-alpha * static_cast<double>(n)) * pmf_t[n];
  // mass beyond the explicit range contributes (1 - e^{-alpha n}) K(n)
  const double a = static_cast<double>(n_explicit + 1);
  const double rest = mass / norm_ * heavy_one_minus_tail(a, alpha);
  return p_inf_ + static_cast<double>(acc) + rest;
}

// ---------------------------------------------------------------------------
// sampling

inline Excursion ExcursionLaw::sample(Xoshiro256pp& rng) const {
  // E = min{n : tail(n) < v} for v uniform on (0, 1]
  const double v = rng.uniform_pos();
  switch (kind_) {
    case Kind::Deterministic:
      return v <= p_inf_ ? kInfiniteExcursion : det_k_;
    case Kind::Geometric: {
      if (v <= p_inf_) return kInfiniteExcursion;
      if (geo_p_ == 1.0) return 1;
      const double vr = (v - p_inf_) / (1.0 - p_inf_);
      const double n = std::floor(std::log(vr) / std::log1p(-geo_p_)) + 1.0;
      return n >= 9.0e18 ? kInfiniteExcursion - 1 : static_cast<Excursion>(n);
    }
    case Kind::HeavyTail:
      break;
  }
  const auto& t = tables_->tail;
  auto it = std::partition_point(t.begin(), t.end(), [v](double x) { return x >= v; });
  if (it != t.end()) return static_cast<Excursion>(it - t.begin());
  if (v <= p_inf_) return kInfiniteExcursion;
  const double n_tab = static_cast<double>(t.size() - 1);
  const double vr = (v - p_inf_) / (t.back() - p_inf_);
  const double n = std::ceil(n_tab * std::pow(vr, -1.0 / (c_ - 1.0)));
  return n >= 9.0e18 ? kInfiniteExcursion - 1 : std::max<Excursion>(static_cast<Excursion>(n), t.size());
}

inline std::string ExcursionLaw::spec_string() const {
  char buf[160];
  switch (kind_) {
    case Kind::HeavyTail:
      std::snprintf(buf, sizeof buf, "heavy(c=%.17g, phi=%s, p_inf=%.17g, n_table=%zu)", c_,
                    phi_.to_string().c_str(), p_inf_, n_table());
      break;
    case Kind::Geometric:
      if (p_inf_ == 0.0) std::snprintf(buf, sizeof buf, "geometric(%.17g)", geo_p_);
      else std::snprintf(buf, sizeof buf, "geometric(%.17g, p_inf=%.17g)", geo_p_, p_inf_);
      break;
    case Kind::Deterministic:
      if (p_inf_ == 0.0) std::snprintf(buf, sizeof buf, "deterministic(%lld)", static_cast<long long>(det_k_));
      else std::snprintf(buf, sizeof buf, "deterministic(%lld, p_inf=%.17g)", static_cast<long long>(det_k_), p_inf_);
      break;
  }
  return buf;
}

// ---------------------------------------------------------------------------
// free-function interface

inline ExcursionLaw build_law(double c, const SlowlyVarying& phi, double p_inf,
                              std::size_t n_table = ExcursionLaw::kDefaultTable) {
  return ExcursionLaw::heavy(c, phi, p_inf, n_table);
}

/// M_E(-alpha) = sum_n e^{-alpha n} K(n).
inline double mgf(const ExcursionLaw& law, double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("mgf: alpha must be >= 0");
  return law.moments(alpha).s0;
}

/// log M_E(-alpha), accurate for small alpha.
inline double log_mgf(const ExcursionLaw& law, double alpha) {
  const double om = law.one_minus_mgf(alpha);
  if (om < 0.5) return std::log1p(-om);
  return std::log(law.moments(alpha).s0);
}

/// First or second derivative of log M_E at -alpha: the mean and the
/// variance of the law tilted by e^{-alpha n}.
inline double log_mgf_deriv(const ExcursionLaw& law, double alpha, int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("log_mgf_deriv: order must be 1 or 2");
  if (!(alpha >= 0.0)) throw std::invalid_argument("log_mgf_deriv: alpha must be >= 0");
  if (alpha == 0.0 && !law.has_finite_mean())
    throw std::domain_error("log_mgf_deriv: divergent at alpha = 0 for an infinite-mean law");
  const Moments m = law.moments(alpha);
  const double mean = m.s1 / m.s0;
  if (order == 1) return mean;
  return std::max(0.0, m.s2 / m.s0 - mean * mean);
}

/// Renewal mass u_n = P(X_n = 0), n = 0..N: u_0 = 1, u_n = sum_m K(m) u_{n-m}.
/// Direct recursion up to 8192, FFT power-series inversion of 1 - K(z) beyond.
inline std::vector<double> return_mass(const ExcursionLaw& law, std::size_t N) {
  if (N < 1) throw std::invalid_argument("return_mass: N must be >= 1");
  const auto K = law.pmf_vector(N);
  std::vector<double> u;
  if (N <= 8192) {
    u.assign(N + 1, 0.0);
    u[0] = 1.0;
    for (std::size_t n = 1; n <= N; ++n) {
      double s = 0.0;
      for (std::size_t m = 1; m <= n; ++m) s += K[m] * u[n - m];
      u[n] = s;
    }
    return u;
  }
  std::vector<double> f(N + 1);
  f[0] = 1.0;
  for (std::size_t n = 1; n <= N; ++n) f[n] = -K[n];
  u = series_inverse(f, N + 1);
  for (auto& x : u) x = std::clamp(x, 0.0, 1.0);
  u[0] = 1.0;
  return u;
}

/// Conditioning on a finite excursion: K_R(n) = K(n) / (1 - p_inf).
/// A recurrent input is returned unchanged and `warning` is set.
inline ExcursionLaw recurrentize(const ExcursionLaw& law, std::string* warning = nullptr) {
  if (law.is_recurrent()) {
    if (warning) *warning = "recurrentize: law is already recurrent; returned unchanged";
    return law;
  }
  switch (law.kind()) {
    case ExcursionLaw::Kind::HeavyTail:
      return ExcursionLaw::heavy(law.c(), law.phi(), 0.0, law.n_table());
    case ExcursionLaw::Kind::Geometric:
      return ExcursionLaw::geometric(law.geometric_p());
    case ExcursionLaw::Kind::Deterministic:
      return ExcursionLaw::deterministic(law.deterministic_k());
  }
  return law;
}

/// Deterministic critical point -log(P(E_1 < inf)) / beta.
inline double deterministic_critical_u(const ExcursionLaw& law, double beta) {
  return -std::log1p(-law.p_inf()) / beta;
}

/// Law reweighted by e^{-alpha n} / M_E(-alpha).
class TiltedLaw {
 public:
  static constexpr std::size_t kMaxTable = std::size_t{1} << 24;

  TiltedLaw(ExcursionLaw base, double alpha) : base_(std::move(base)), alpha_(alpha) {
    if (!(alpha > 0)) throw std::invalid_argument("TiltedLaw: alpha must be > 0");
    const Moments m = base_.moments(alpha);
    mgf_ = m.s0;
    mean_ = m.s1 / m.s0;
    var_ = std::max(0.0, m.s2 / m.s0 - mean_ * mean_);
    // tail table until the remaining mass is negligible
    std::vector<double> cdf{0.0};
    long double acc = 0;
    for (std::size_t n = 1; n < kMaxTable; ++n) {
      acc += base_.pmf(static_cast<std::int64_t>(n)) * std::exp(-alpha * static_cast<double>(n)) / mgf_;
      cdf.push_back(static_cast<double>(acc));
      if (1.0L - acc < 1e-15L && n >= static_cast<std::size_t>(base_.min_support())) break;
    }
    cdf_ = std::move(cdf);
  }

  const ExcursionLaw& base() const { return base_; }
  double alpha() const { return alpha_; }
  double pmf(std::int64_t n) const {
    return base_.pmf(n) * std::exp(-alpha_ * static_cast<double>(n)) / mgf_;
  }
  double mean() const { return mean_; }
  double variance() const { return var_; }

  Excursion sample(Xoshiro256pp& rng) const {
    const double v = rng.uniform() * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), v);
    return static_cast<Excursion>(it - cdf_.begin());
  }

 private:
  ExcursionLaw base_;
  double alpha_;
  double mgf_ = 1.0;
  double mean_ = 0.0;
  double var_ = 0.0;
  std::vector<double> cdf_;
};

}  // namespace pinlab

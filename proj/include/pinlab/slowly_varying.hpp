#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "pinlab/numerics.hpp"

namespace pinlab {

/// Slowly varying modulation of the excursion tail: either a positive
/// constant or (log(n + e))^a.
class SlowlyVarying {
 public:
  enum class Kind { Constant, LogPower };

  static SlowlyVarying constant(double a) {
    if (!(a > 0) || !std::isfinite(a))
      throw std::invalid_argument("const(a) slowly varying factor needs a > 0, got " +
                                  std::to_string(a));
    return SlowlyVarying(Kind::Constant, a);
  }
  static SlowlyVarying log_power(double a) {
    if (!std::isfinite(a)) throw std::invalid_argument("logpow(a) needs finite a");
    return SlowlyVarying(Kind::LogPower, a);
  }

  Kind kind() const { return kind_; }
  double param() const { return a_; }
  bool is_constant() const { return kind_ == Kind::Constant; }

  double operator()(double x) const { return std::exp(log_value(x)); }

  double log_value(double x) const {
    if (kind_ == Kind::Constant) return std::log(a_);
    return a_ * std::log(std::log(x + std::numbers::e));
  }

  /// k-th derivative (k = 1..3) of log phi at x.
  double log_deriv(double x, int k) const {
    if (kind_ == Kind::Constant || a_ == 0.0) return 0.0;
    const double y = x + std::numbers::e;
    const double L = std::log(y);
    switch (k) {
      case 1: return a_ / (y * L);
      case 2: return -a_ * (L + 1) / (y * y * L * L);
      case 3: return a_ * (2 * L * L + 3 * L + 2) / (y * y * y * L * L * L);
      default: throw std::invalid_argument("log_deriv: order must be 1..3");
    }
  }

  /// True when sum_n 1/(n phi(n)^2) diverges.
  bool tilde_diverges() const { return kind_ == Kind::Constant || a_ <= 0.5; }

  std::string to_string() const;

 private:
  SlowlyVarying(Kind k, double a) : kind_(k), a_(a) {}
  Kind kind_;
  double a_;
};

inline std::string SlowlyVarying::to_string() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s(%.17g)", kind_ == Kind::Constant ? "const" : "logpow", a_);
  return buf;
}

namespace detail {

inline constexpr double kTildeExactLimit = 65536.0;

// sum_{n<=m} 1/(n phi(n)^2) for integer m <= kTildeExactLimit
inline double tilde_phi_exact(const SlowlyVarying& phi, long m) {
  double s = 0.0;
  for (long n = 1; n <= m; ++n) s += std::exp(-std::log(static_cast<double>(n)) - 2 * phi.log_value(n));
  return s;
}

// Euler-Maclaurin continuation of the partial sum beyond the exact range,
// with a real upper limit x.
inline double tilde_phi_em(const SlowlyVarying& phi, double x) {
  const double n0 = kTildeExactLimit;
  static thread_local double cached_head = -1.0;
  static thread_local double cached_param = std::numeric_limits<double>::quiet_NaN();
  static thread_local int cached_kind = -1;
  if (cached_kind != static_cast<int>(phi.kind()) || cached_param != phi.param()) {
    cached_head = tilde_phi_exact(phi, static_cast<long>(n0));
    cached_kind = static_cast<int>(phi.kind());
    cached_param = phi.param();
  }
  auto g = [&](double t) { return std::exp(-std::log(t) - 2 * phi.log_value(t)); };
  auto gp = [&](double t) { return g(t) * (-1.0 / t - 2 * phi.log_deriv(t, 1)); };
  double integral;
  if (phi.is_constant()) {
    integral = (std::log(x) - std::log(n0)) / (phi.param() * phi.param());
  } else {
    // substitute s = log t: integrand phi(e^s)^{-2}
    auto h = [&](double s) { return std::exp(-2 * phi.log_value(std::exp(s))); };
    integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        h, std::log(n0), std::log(x), 15, 1e-14);
  }
  return cached_head + integral + 0.5 * (g(x) - g(n0)) + (gp(x) - gp(n0)) / 12.0;
}

}  // namespace detail

/// Partial sum sum_{n <= x} n^{-1} phi(n)^{-2}. Exact summation up to 2^16
/// terms, Euler-Maclaurin beyond (relative error far below 1e-12).
inline double tilde_phi(const SlowlyVarying& phi, double x) {
  if (!(x >= 1)) throw std::invalid_argument("tilde_phi: x must be >= 1");
  const double m = std::floor(x);
  if (m <= detail::kTildeExactLimit) return detail::tilde_phi_exact(phi, static_cast<long>(m));
  return detail::tilde_phi_em(phi, m);
}

/// Generalized inverse of tilde_phi: the smallest m with tilde_phi(m) >= y.
/// Integer-valued while m < 2^50; beyond that a real root of the smooth
/// continuation.
inline double tilde_phi_inverse(const SlowlyVarying& phi, double y) {
  if (!phi.tilde_diverges()) {
    throw std::domain_error("tilde_phi_inverse: sum 1/(n phi(n)^2) converges for " +
                            phi.to_string() + "; no inverse at large arguments");
  }
  if (y <= tilde_phi(phi, 1.0)) return 1.0;
  const double int_limit = 0x1.0p50;
  if (y <= tilde_phi(phi, int_limit)) {
    double lo = 1.0, hi = 2.0;
    while (tilde_phi(phi, hi) < y) {
      lo = hi;
      hi *= 2.0;
    }
    // invariant: tilde(lo) < y <= tilde(hi)
    while (hi - lo > 1.0) {
      const double mid = std::floor(0.5 * (lo + hi));
      if (tilde_phi(phi, mid) >= y) hi = mid;
      else lo = mid;
    }
    return hi;
  }
  double lo_log = std::log(int_limit), hi_log = 2 * lo_log;
  while (detail::tilde_phi_em(phi, std::exp(hi_log)) < y) {
    lo_log = hi_log;
    hi_log *= 2.0;
    if (hi_log > 700) throw std::overflow_error("tilde_phi_inverse: argument beyond double range");
  }
  const double s = bisect([&](double t) { return detail::tilde_phi_em(phi, std::exp(t)) - y; },
                          lo_log, hi_log, 1e-15);
  return std::exp(s);
}

}  // namespace pinlab

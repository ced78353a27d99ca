#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pinlab {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(sum(exp(x))) with max shift; -inf for empty or all -inf input.
inline double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

/// Streaming log-sum-exp accumulator.
class LogSumExp {
 public:
  void add(double x) {
    if (x == kNegInf) return;
    if (x <= max_) {
      sum_ += std::exp(x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }
  double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

/// Bisection for a sign change of f on [lo, hi]. Stops when the bracket is
/// narrower than rel_tol * max(|lo|,|hi|) (or abs_tol). Uses geometric
/// midpoints while the bracket spans more than a factor of 4 on (0, inf).
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double rel_tol = 1e-12, double abs_tol = 0.0, int max_iter = 400) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) {
    throw std::domain_error("bisect: no sign change on [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "]: f(lo)=" + std::to_string(flo) +
                            ", f(hi)=" + std::to_string(fhi));
  }
  for (int it = 0; it < max_iter; ++it) {
    const double width = hi - lo;
    if (width <= std::max(abs_tol, rel_tol * std::max(std::abs(lo), std::abs(hi)))) break;
    double mid = (lo > 0 && hi > 4 * lo) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  std::size_t dof = 0;
};

/// Ordinary least squares y = intercept + slope * x.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw std::invalid_argument("linear_fit: need >= 2 paired points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("linear_fit: degenerate x");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.dof = n - 2;
  if (n > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.slope_se = std::sqrt(rss / (n - 2) / sxx);
  }
  return fit;
}

/// Slope of log(y) against log(x).
inline LinearFit loglog_fit(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  std::transform(x.begin(), x.end(), lx.begin(), [](double v) { return std::log(v); });
  std::transform(y.begin(), y.end(), ly.begin(), [](double v) { return std::log(v); });
  return linear_fit(lx, ly);
}

inline std::vector<double> geometric_grid(double lo, double hi, std::size_t n) {
  if (n < 2 || lo <= 0 || hi <= lo) throw std::invalid_argument("geometric_grid: bad range");
  std::vector<double> g(n);
  const double r = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo * std::exp(r * static_cast<double>(i));
  g.back() = hi;
  return g;
}

}  // namespace pinlab

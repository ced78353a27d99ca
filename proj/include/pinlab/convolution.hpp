#pragma once

// Real linear convolution and power-series inversion backed by FFTW.

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

namespace pinlab {

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (!p) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace detail

/// First `out_len` coefficients of a * b.
inline std::vector<double> convolve(std::span<const double> a, std::span<const double> b,
                                    std::size_t out_len) {
  std::vector<double> out(out_len, 0.0);
  if (a.empty() || b.empty() || out_len == 0) return out;
  const std::size_t full = a.size() + b.size() - 1;
  if (std::min(a.size(), b.size()) <= 64) {
    for (std::size_t i = 0; i < a.size() && i < out_len; ++i)
      for (std::size_t j = 0; j < b.size() && i + j < out_len; ++j) out[i + j] += a[i] * b[j];
    return out;
  }
  const std::size_t n = detail::next_pow2(std::min(full, a.size() + b.size()));
  const std::size_t nc = n / 2 + 1;
  auto ra = detail::fftw_buffer<double>(n);
  auto rb = detail::fftw_buffer<double>(n);
  auto ca = detail::fftw_buffer<fftw_complex>(nc);
  auto cb = detail::fftw_buffer<fftw_complex>(nc);
  fftw_plan pa, pb, pinv;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    pa = fftw_plan_dft_r2c_1d(static_cast<int>(n), ra.get(), ca.get(), FFTW_ESTIMATE);
    pb = fftw_plan_dft_r2c_1d(static_cast<int>(n), rb.get(), cb.get(), FFTW_ESTIMATE);
    pinv = fftw_plan_dft_c2r_1d(static_cast<int>(n), ca.get(), ra.get(), FFTW_ESTIMATE);
  }
  std::fill(ra.get(), ra.get() + n, 0.0);
  std::fill(rb.get(), rb.get() + n, 0.0);
  std::copy(a.begin(), a.end(), ra.get());
  std::copy(b.begin(), b.end(), rb.get());
  fftw_execute(pa);
  fftw_execute(pb);
  for (std::size_t k = 0; k < nc; ++k) {
    const double re = ca[k][0] * cb[k][0] - ca[k][1] * cb[k][1];
    const double im = ca[k][0] * cb[k][1] + ca[k][1] * cb[k][0];
    ca[k][0] = re;
    ca[k][1] = im;
  }
  fftw_execute(pinv);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < std::min(out_len, full); ++i) out[i] = ra[i] * scale;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(pa);
    fftw_destroy_plan(pb);
    fftw_destroy_plan(pinv);
  }
  return out;
}

/// Coefficients 0..len-1 of 1/f(z) by Newton iteration g <- g(2 - f g).
/// Requires f[0] != 0.
inline std::vector<double> series_inverse(std::span<const double> f, std::size_t len) {
  if (f.empty() || f[0] == 0.0) throw std::invalid_argument("series_inverse: f[0] must be nonzero");
  std::vector<double> g{1.0 / f[0]};
  g.reserve(len);
  std::size_t m = 1;
  while (m < len) {
    const std::size_t m2 = std::min(2 * m, len);
    auto e = convolve(f.subspan(0, std::min(m2, f.size())), g, m2);
    // e = f g = 1 + O(z^m); correct g with the order-m..m2 residual
    std::span<const double> resid(e.data() + m, m2 - m);
    auto corr = convolve(std::span<const double>(g.data(), std::min(g.size(), m2 - m)), resid, m2 - m);
    for (std::size_t i = 0; i < m2 - m; ++i) g.push_back(-corr[i]);
    m = m2;
  }
  g.resize(len);
  return g;
}

}  // namespace pinlab

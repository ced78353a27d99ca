#pragma once

// Exhaustive enumeration over all 2^N return sets, independent of the DP.
// Exponential cost; meant for N <= 20.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pinlab/excursion_law.hpp"

namespace pinlab {

struct Enumeration {
  double log_Z = 0.0;
  double mean_LN = 0.0;
  std::vector<double> marginal;  // P(i is a return), i = 1..N at index i
  std::vector<double> set_prob;  // posterior of each subset, indexed by bitmask
};

inline Enumeration enumerate_returns(const ExcursionLaw& law, double beta, double u,
                                     std::span<const double> V) {
  const int N = static_cast<int>(V.size());
  if (N < 1 || N > 24) throw std::invalid_argument("enumerate_returns: N must lie in [1, 24]");
  const std::uint64_t n_sets = std::uint64_t{1} << N;
  std::vector<long double> w(n_sets);
  long double Z = 0;
  for (std::uint64_t mask = 0; mask < n_sets; ++mask) {
    long double weight = 1;
    long double energy = 0;
    int last = 0;
    for (int i = 1; i <= N; ++i) {
      if (mask >> (i - 1) & 1) {
        weight *= law.pmf(i - last);
        energy += beta * (u + V[i - 1]);
        last = i;
      }
    }
    weight *= law.tail(N - last);
    weight *= std::exp(energy);
    w[mask] = weight;
    Z += weight;
  }
  Enumeration e;
  e.log_Z = static_cast<double>(std::log(Z));
  e.marginal.assign(N + 1, 0.0);
  e.set_prob.resize(n_sets);
  long double mean = 0;
  for (std::uint64_t mask = 0; mask < n_sets; ++mask) {
    const long double p = w[mask] / Z;
    e.set_prob[mask] = static_cast<double>(p);
    mean += p * __builtin_popcountll(mask);
    for (int i = 1; i <= N; ++i)
      if (mask >> (i - 1) & 1) e.marginal[i] += static_cast<double>(p);
  }
  e.mean_LN = static_cast<double>(mean);
  return e;
}

}  // namespace pinlab

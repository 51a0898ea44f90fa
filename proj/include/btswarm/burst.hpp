// Bounds on the expected number of leechers departing in a burst with the
// leecher that opened a busy period.
//
// That first leecher downloads at the seed rate and stays for T = S/c_s.  A
// high quantile of the Poisson arrival count during T sizes the swarm; the
// allocation model then gives the slowest and fastest rates later arrivals
// can sustain, and everyone fast enough to finish before the first leecher
// leaves in the same burst.

#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "btswarm/fluid_model.hpp"

namespace btswarm {

// Smallest n with Poisson-CDF(n; mean) >= p.  The pmf recurrence runs in log
// space, so large means neither overflow nor underflow to a stuck zero.
inline int poisson_quantile(double mean, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("poisson_quantile: p must be in (0,1)");
  if (mean < 0) throw std::invalid_argument("poisson_quantile: mean must be >= 0");
  if (mean == 0) return 0;

  double log_pmf = -mean;  // log P[X = 0]
  double cdf = std::exp(log_pmf);
  int k = 0;
  const int k_max = static_cast<int>(mean + 40.0 * std::sqrt(mean) + 100.0);
  while (cdf < p && k < k_max) {
    ++k;
    log_pmf += std::log(mean) - std::log(static_cast<double>(k));
    cdf += std::exp(log_pmf);
  }
  return k;
}

struct BurstBounds {
  double expected_arrivals = 0.0;  // lambda * T
  int n99 = 0;                     // 99th percentile of arrivals during T
  double d_min = 0.0;              // slowest model rate of a later arrival, kB/s
  double d_max = 0.0;              // fastest, kB/s
  double b_min = 0.0;              // expected burst companions, lower bound
  double b_max = 0.0;              // upper bound
  double download_time = 0.0;      // T = S / c_s, seconds
};

// content_kb is the full content size S in kB.
inline BurstBounds burst_bounds(double arrival_rate, double content_kb,
                                double seed_capacity, double leecher_capacity) {
  if (!(arrival_rate > 0) || !(content_kb > 0) || !(seed_capacity > 0) ||
      !(leecher_capacity > 0))
    throw std::invalid_argument("burst_bounds: all arguments must be positive");

  BurstBounds out;
  out.download_time = content_kb / seed_capacity;
  out.expected_arrivals = arrival_rate * out.download_time;
  out.n99 = poisson_quantile(out.expected_arrivals, 0.99);

  if (out.n99 == 0) {
    // No companions expected; the lone leecher's rate is the seed rate.
    out.d_min = out.d_max = seed_capacity;
    out.b_min = out.b_max = 0.0;
    return out;
  }

  const int swarm = out.n99 + 1;
  out.d_min = std::numeric_limits<double>::infinity();
  out.d_max = 0.0;
  for (int n_a = 1; n_a < swarm; ++n_a) {
    const double rate_b = ab_scenario(swarm, n_a, seed_capacity, leecher_capacity).rate_b;
    out.d_min = std::min(out.d_min, rate_b);
    out.d_max = std::max(out.d_max, rate_b);
  }

  const double lambda = arrival_rate;
  out.b_min = std::max(0.0, lambda * (out.download_time - content_kb / out.d_min));
  out.b_max = std::max(0.0, lambda * (out.download_time - content_kb / out.d_max));
  return out;
}

// One table row per parameter set: c_s, E[N], B_min, B_max and the B/E[N]
// ratios.  A trailing marker calls out fast-seed rows, where d_max is pinned
// by the leechers' capacity and the upper bound is usually clamped to zero.
inline std::string format_predict_row(const BurstBounds& b, double seed_capacity,
                                      double leecher_capacity) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << seed_capacity << "," << b.expected_arrivals << "," << b.b_min << ","
     << b.b_max << "," << b.b_min / b.expected_arrivals << ","
     << b.b_max / b.expected_arrivals;
  os << "," << (seed_capacity > leecher_capacity ? "fast-seed" : "-");
  return os.str();
}

inline std::string predict_header() {
  return "cs_kbps,expected_arrivals,b_min,b_max,b_min_ratio,b_max_ratio,flag";
}

}  // namespace btswarm

// Independent progressive-filling reference for the allocation model.
//
// Instead of the closed-form share expression, every uploader's capacity is
// distributed by an explicit water-filling pass: all recipients rise
// together, each freezes at its potential rate, the remainder keeps flowing
// to the rest.  Rows are processed in decreasing piece-count order so the
// potential-rate sums only read finalized entries.

#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "btswarm/fluid_model.hpp"

namespace btswarm::testing {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Uniform rise with freezing; exact (jumps between freeze points).
inline std::vector<double> water_fill(const std::vector<double>& caps, double capacity) {
  const std::size_t m = caps.size();
  std::vector<double> alloc(m, 0.0);
  std::vector<bool> frozen(m, false);
  double level = 0.0;
  double remaining = capacity;
  for (;;) {
    std::size_t active = 0;
    double next_cap = kInf;
    for (std::size_t j = 0; j < m; ++j)
      if (!frozen[j]) {
        ++active;
        next_cap = std::min(next_cap, caps[j]);
      }
    if (active == 0 || remaining <= 0) break;
    const double rise = remaining / active;
    if (next_cap - level <= rise) {
      remaining -= (next_cap - level) * active;
      level = next_cap;
      for (std::size_t j = 0; j < m; ++j)
        if (!frozen[j]) {
          alloc[j] = level;
          if (caps[j] <= level) frozen[j] = true;
        }
    } else {
      level += rise;
      for (std::size_t j = 0; j < m; ++j)
        if (!frozen[j]) alloc[j] = level;
      break;
    }
  }
  return alloc;
}

// Literal epsilon-increment variant; slow, used to spot-check water_fill.
inline std::vector<double> water_fill_epsilon(const std::vector<double>& caps,
                                              double capacity, double eps) {
  const std::size_t m = caps.size();
  std::vector<double> alloc(m, 0.0);
  double remaining = capacity;
  while (remaining > capacity * 1e-12) {
    std::size_t active = 0;
    for (std::size_t j = 0; j < m; ++j)
      if (alloc[j] < caps[j]) ++active;
    if (active == 0) break;
    const double step = std::min(eps, remaining / active);
    bool moved = false;
    for (std::size_t j = 0; j < m; ++j) {
      if (alloc[j] >= caps[j]) continue;
      const double take = std::min(step, caps[j] - alloc[j]);
      alloc[j] += take;
      remaining -= take;
      moved = moved || take > 0;
    }
    if (!moved) break;
  }
  return alloc;
}

template <typename Fill>
inline RateMatrix fill_oracle_with(const AllocationInput& input, Fill fill) {
  const auto& counts = input.counts;
  const int n_peers = static_cast<int>(counts.size());
  RateMatrix m;
  m.n_leechers = n_peers;
  m.seed_share = input.seed_capacity / n_peers;
  m.upload.assign(static_cast<std::size_t>(n_peers) * n_peers, 0.0);
  if (n_peers == 1) return m;

  std::vector<int> order(n_peers);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return counts[a] > counts[b]; });

  for (int i : order) {
    std::vector<int> recipients;
    std::vector<double> caps;
    for (int j = 0; j < n_peers; ++j) {
      if (j == i) continue;
      recipients.push_back(j);
      if (counts[i] > counts[j]) {
        caps.push_back(kInf);
      } else {
        double g = input.seed_capacity / n_peers;
        for (int k = 0; k < n_peers; ++k)
          if (counts[k] > counts[j]) g += m(k, i);
        caps.push_back(g);
      }
    }
    const std::vector<double> alloc = fill(caps, input.leecher_capacity);
    for (std::size_t t = 0; t < recipients.size(); ++t) m.at(i, recipients[t]) = alloc[t];
  }
  return m;
}

inline RateMatrix fill_oracle(const AllocationInput& input) {
  return fill_oracle_with(input, [](const std::vector<double>& caps, double cap) {
    return water_fill(caps, cap);
  });
}

inline RateMatrix fill_oracle_epsilon(const AllocationInput& input, double eps) {
  return fill_oracle_with(input, [eps](const std::vector<double>& caps, double cap) {
    return water_fill_epsilon(caps, cap, eps);
  });
}

// Largest absolute entry difference between two allocations.
inline double max_abs_difference(const RateMatrix& a, const RateMatrix& b) {
  double worst = std::abs(a.seed_share - b.seed_share);
  for (std::size_t k = 0; k < a.upload.size(); ++k)
    worst = std::max(worst, std::abs(a.upload[k] - b.upload[k]));
  return worst;
}

// Small b-vector universe: every tuple over `values` for sizes 1..max_n.
inline std::vector<PieceCountVector> tuple_universe(const std::vector<int>& values,
                                                    int max_n) {
  std::vector<PieceCountVector> out;
  for (int n = 1; n <= max_n; ++n) {
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
      PieceCountVector b(n);
      for (int k = 0; k < n; ++k) b[k] = values[idx[k]];
      out.push_back(b);
      int pos = n - 1;
      while (pos >= 0 && ++idx[pos] == values.size()) idx[pos--] = 0;
      if (pos < 0) break;
    }
  }
  return out;
}

}  // namespace btswarm::testing

// Interest-constrained upload allocation between leechers.
//
// A leecher that is strictly ahead of another (more pieces) always has data
// the other wants, so its rate toward it is limited only by capacity.  A
// leecher that is behind or level can forward at most what it receives from
// the seed plus what peers ahead of the recipient are uploading to it.  Each
// uploader's capacity is then spread over its recipients by progressive
// filling: everyone rises together, recipients freeze at their potential rate,
// the remainder is split over the rest.

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "btswarm/types.hpp"

namespace btswarm {

struct AllocationInput {
  PieceCountVector counts;         // pieces per leecher, arrival order
  double seed_capacity = 0.0;      // kB/s
  double leecher_capacity = 0.0;   // kB/s
  int recipients_per_leecher = 0;  // denominator base of the fill rule; 0 means N-1
};

// Rate at which `uploader` could feed `recipient` ignoring its own capacity:
// seed share plus everything leechers ahead of the recipient push to the
// uploader.  nullopt when the uploader is strictly ahead (no constraint).
//
// Entries of `partial` for every k ahead of the recipient must already be
// final; when `computed` is given, that contract is checked.
inline std::optional<double> potential_rate(int uploader, int recipient,
                                            const PieceCountVector& counts,
                                            const RateMatrix& partial,
                                            double seed_capacity,
                                            const std::vector<bool>* computed = nullptr) {
  const int n_peers = static_cast<int>(counts.size());
  if (counts[uploader] > counts[recipient]) return std::nullopt;
  double rate = seed_capacity / n_peers;
  for (int k = 0; k < n_peers; ++k) {
    if (counts[k] > counts[recipient]) {
      assert((!computed || (*computed)[k * n_peers + uploader]) &&
             "fill order violated: needed upload rate not yet computed");
      (void)computed;
      rate += partial(k, uploader);
    }
  }
  return rate;
}

// Computes the full rate matrix.  Rows are filled in decreasing piece-count
// order (ties by arrival index), which coincides with arrival order whenever
// counts are non-increasing and guarantees every rate a potential-rate sum
// needs has been fixed beforehand.
inline RateMatrix allocate(const AllocationInput& input) {
  const auto& counts = input.counts;
  const int n_peers = static_cast<int>(counts.size());
  if (n_peers < 1) throw std::invalid_argument("allocate: counts must be non-empty");
  if (!(input.seed_capacity > 0) || !(input.leecher_capacity > 0))
    throw std::invalid_argument("allocate: capacities must be positive");

  RateMatrix m;
  m.n_leechers = n_peers;
  m.seed_share = input.seed_capacity / n_peers;
  m.upload.assign(static_cast<std::size_t>(n_peers) * n_peers, 0.0);
  if (n_peers == 1) return m;

  const int n = input.recipients_per_leecher > 0 ? input.recipients_per_leecher
                                                 : n_peers - 1;
  if (n < 1) throw std::invalid_argument("allocate: recipients_per_leecher must be >= 1");

  std::vector<int> order(n_peers);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return counts[a] > counts[b]; });

  std::vector<bool> computed(m.upload.size(), false);
  for (int i : order) {
    for (int j : order) {
      if (j == i) continue;
      const std::optional<double> g =
          potential_rate(i, j, counts, m, input.seed_capacity, &computed);

      // Capacity left after recipients ahead of j, split over the peers that
      // still share it (j included, equal-count peers not yet deducted).
      double already = 0.0;
      int ahead = 0;
      for (int k = 0; k < n_peers; ++k) {
        if (counts[k] > counts[j]) {
          already += m(i, k);
          if (k != i) ++ahead;
        }
      }
      const int denom = n - ahead;
      double share = 0.0;
      if (denom > 0) share = std::max(0.0, (input.leecher_capacity - already) / denom);
      m.at(i, j) = g ? std::min(*g, share) : share;
      computed[i * n_peers + j] = true;
    }
  }
  return m;
}

// Download rate of each leecher: seed share plus its column sum.
inline std::vector<double> download_rates(const RateMatrix& m) {
  std::vector<double> rates(m.n_leechers, m.seed_share);
  for (int j = 0; j < m.n_leechers; ++j) rates[j] += m.column_sum(j);
  return rates;
}

struct AbScenarioResult {
  double rate_a = 0.0;  // mean download rate of leechers level with the oldest
  double rate_b = 0.0;  // mean download rate of the strictly-behind leechers; NaN if none
  RateMatrix matrix;
};

// Swarm split into subset A (n_a leechers holding the top piece count) and
// subset B (the rest, strictly decreasing below it).  Only the ordering and
// equality pattern of the counts matters, not their magnitudes.
inline AbScenarioResult ab_scenario(int n_leechers, int n_a, double seed_capacity,
                                    double leecher_capacity,
                                    int recipients_per_leecher = 0) {
  if (n_leechers < 1 || n_a < 1 || n_a > n_leechers)
    throw std::invalid_argument("ab_scenario: need 1 <= n_a <= n_leechers");

  PieceCountVector counts(n_leechers);
  const int top = 10 * (n_leechers + 1);
  for (int i = 0; i < n_a; ++i) counts[i] = top;
  for (int i = n_a; i < n_leechers; ++i) counts[i] = top - 10 * (i - n_a + 1);

  AbScenarioResult result;
  result.matrix = allocate({counts, seed_capacity, leecher_capacity, recipients_per_leecher});
  const std::vector<double> rates = download_rates(result.matrix);
  result.rate_a = std::accumulate(rates.begin(), rates.begin() + n_a, 0.0) / n_a;
  result.rate_b = n_a < n_leechers
                      ? std::accumulate(rates.begin() + n_a, rates.end(), 0.0) /
                            (n_leechers - n_a)
                      : std::numeric_limits<double>::quiet_NaN();
  return result;
}

}  // namespace btswarm

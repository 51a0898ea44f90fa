// Model-versus-simulation comparison on deterministic arrival scenarios.
//
// For each swarm size N and each split n_A, the first n_A leechers arrive one
// second apart and synchronize on the seed stream; the remaining N - n_A
// arrive late enough to stay strictly behind, spaced so that every count gap
// survives until measurement.  Download rates are averaged over a window
// placed after the last arrival and before the first departure, then compared
// against the allocation model.
//
// With gaps this size the B block must finish arriving well before the first
// departure at ~T = S/c_s, which bounds the usable spacing: the block ends at
// 0.6 T with 0.03 T between arrivals, and the window is [0.65 T, 0.95 T].

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <vector>

#include "btswarm/fluid_model.hpp"
#include "btswarm/sim.hpp"

namespace btswarm {

struct ValidationCell {
  int n_leechers = 0;
  int n_a = 0;
  double model_rate_a = 0.0;
  double model_rate_b = 0.0;  // NaN when every leecher is in A
  double sim_rate_a = 0.0;
  double sim_rate_b = 0.0;
  double err_a = 0.0;  // |sim - model| / sim
  double err_b = 0.0;
  double window_start = 0.0;
  double window_end = 0.0;
  double a_spread_pieces = 0.0;  // max |b_1 - b_i| over A when B starts arriving
  bool measured = false;         // window fell after all arrivals and before any departure
};

struct ValidationReport {
  double seed_capacity = 0.0;
  double leecher_capacity = 0.0;
  int piece_count = 0;
  double piece_size = 0.0;
  int max_n = 0;
  std::vector<ValidationCell> cells;
};

namespace detail {

// Completion count of each peer at a given instant (count of pieces finished
// at or before t), from the trace's completion events.
inline std::vector<int> counts_at(const std::vector<std::vector<double>>& completions,
                                  double t) {
  std::vector<int> counts(completions.size(), 0);
  for (std::size_t i = 0; i < completions.size(); ++i) {
    const auto& c = completions[i];
    counts[i] = static_cast<int>(std::upper_bound(c.begin(), c.end(), t) - c.begin());
  }
  return counts;
}

}  // namespace detail

inline ValidationCell validate_cell(int n_leechers, int n_a, double seed_capacity,
                                    double leecher_capacity, int piece_count,
                                    double piece_size, std::uint64_t rng_seed) {
  ValidationCell cell;
  cell.n_leechers = n_leechers;
  cell.n_a = n_a;

  const auto model = ab_scenario(n_leechers, n_a, seed_capacity, leecher_capacity);
  cell.model_rate_a = model.rate_a;
  cell.model_rate_b = model.rate_b;

  const double total_time = piece_count * piece_size / seed_capacity;
  const int n_b = n_leechers - n_a;

  SwarmConfig cfg;
  cfg.seed_capacity = seed_capacity;
  cfg.leecher_capacity = leecher_capacity;
  cfg.piece_count = piece_count;
  cfg.piece_size = piece_size;
  cfg.rng_seed = rng_seed;
  ScheduleArrivals sched;
  for (int i = 0; i < n_a; ++i) sched.times.push_back(i);
  for (int k = 0; k < n_b; ++k)
    sched.times.push_back(0.6 * total_time - 0.03 * total_time * (n_b - 1 - k));
  const double last_arrival = sched.times.back();
  cfg.arrivals = std::move(sched);

  SimOptions opts;
  opts.snapshot_interval = 0;
  const EventTrace trace = run(cfg, opts);

  std::vector<std::vector<double>> completions(n_leechers);
  double first_departure = std::numeric_limits<double>::infinity();
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::piece_complete)
      completions[e.peer - 1].push_back(e.time);
    else if (e.kind == EventKind::departure)
      first_departure = std::min(first_departure, e.time);
  }

  cell.window_start = 0.65 * total_time;
  cell.window_end = 0.95 * total_time;
  cell.measured = cell.window_start > last_arrival && first_departure > cell.window_end;

  const auto start_counts = detail::counts_at(completions, cell.window_start);
  const auto end_counts = detail::counts_at(completions, cell.window_end);
  const double span = cell.window_end - cell.window_start;

  double sum_a = 0, sum_b = 0;
  for (int i = 0; i < n_leechers; ++i) {
    const double rate = (end_counts[i] - start_counts[i]) * piece_size / span;
    (i < n_a ? sum_a : sum_b) += rate;
  }
  cell.sim_rate_a = sum_a / n_a;
  cell.sim_rate_b = n_b > 0 ? sum_b / n_b : std::numeric_limits<double>::quiet_NaN();
  cell.err_a = std::abs(cell.sim_rate_a - cell.model_rate_a) / cell.sim_rate_a;
  cell.err_b = n_b > 0 ? std::abs(cell.sim_rate_b - cell.model_rate_b) / cell.sim_rate_b
                       : std::numeric_limits<double>::quiet_NaN();

  const double b_start = n_b > 0 ? 0.6 * total_time - 0.03 * total_time * (n_b - 1)
                                 : cell.window_start;
  const auto spread_counts = detail::counts_at(completions, b_start);
  int lo = spread_counts[0], hi = spread_counts[0];
  for (int i = 1; i < n_a; ++i) {
    lo = std::min(lo, spread_counts[i]);
    hi = std::max(hi, spread_counts[i]);
  }
  cell.a_spread_pieces = hi - lo;
  return cell;
}

inline ValidationReport run_validation(double seed_capacity, double leecher_capacity,
                                       int max_n = 5, int piece_count = 2000,
                                       double piece_size = 1.0,
                                       std::uint64_t rng_seed = 1) {
  ValidationReport report;
  report.seed_capacity = seed_capacity;
  report.leecher_capacity = leecher_capacity;
  report.piece_count = piece_count;
  report.piece_size = piece_size;
  report.max_n = max_n;
  for (int n = 1; n <= max_n; ++n)
    for (int n_a = 1; n_a <= n; ++n_a)
      report.cells.push_back(validate_cell(n, n_a, seed_capacity, leecher_capacity,
                                           piece_count, piece_size, rng_seed));
  return report;
}

inline void write_validation_csv(std::ostream& os, const ValidationReport& report) {
  os << "n,n_a,model_rate_a,sim_rate_a,err_a,model_rate_b,sim_rate_b,err_b,"
        "window_start_s,window_end_s,a_spread_pieces,measured\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6g", v);
    os << buf;
  };
  for (const auto& c : report.cells) {
    os << c.n_leechers << ',' << c.n_a << ',';
    put(c.model_rate_a);
    os << ',';
    put(c.sim_rate_a);
    os << ',';
    put(c.err_a);
    os << ',';
    put(c.model_rate_b);
    os << ',';
    put(c.sim_rate_b);
    os << ',';
    put(c.err_b);
    os << ',';
    put(c.window_start);
    os << ',';
    put(c.window_end);
    os << ',';
    put(c.a_spread_pieces);
    os << ',' << (c.measured ? 1 : 0) << '\n';
  }
}

}  // namespace btswarm

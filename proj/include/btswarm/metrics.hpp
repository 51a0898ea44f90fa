// Post-processing of event traces: busy periods, download times by arrival
// order, inter-departure gaps, content synchronization and burst sizes.
// Everything works on an immutable EventTrace and emits plot-ready CSV.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "btswarm/sim.hpp"

namespace btswarm {

// Maximal interval during which at least one leecher is present.  Members are
// listed in arrival order; members[0] is the initiator.
struct BusyPeriod {
  double start = 0.0;
  double end = 0.0;
  std::vector<PeerId> members;
  bool closed = false;  // false when the trace ended mid-period
};

inline std::vector<BusyPeriod> busy_periods(const EventTrace& trace) {
  std::vector<BusyPeriod> periods;
  bool open = false;
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::arrival) {
      if (!open) {
        periods.push_back({e.time, e.time, {}, false});
        open = true;
      }
      periods.back().members.push_back(e.peer);
    } else if (e.kind == EventKind::departure && e.leechers_present == 0) {
      periods.back().end = e.time;
      periods.back().closed = true;
      open = false;
    }
  }
  if (open) periods.back().end = trace.end_time;
  return periods;
}

namespace detail {

struct PeerTimes {
  double arrival = -1.0;
  double departure = -1.0;
};

// Arrival/departure instants indexed by peer id (ids are contiguous from 1).
inline std::vector<PeerTimes> peer_times(const EventTrace& trace) {
  std::vector<PeerTimes> times;
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::arrival) {
      if (static_cast<std::size_t>(e.peer) > times.size()) times.resize(e.peer);
      times[e.peer - 1].arrival = e.time;
    } else if (e.kind == EventKind::departure) {
      times[e.peer - 1].departure = e.time;
    }
  }
  return times;
}

}  // namespace detail

// Download times of all peers that completed, in departure order.
inline std::vector<double> completed_download_times(const EventTrace& trace) {
  std::vector<double> out;
  const auto times = detail::peer_times(trace);
  for (const auto& e : trace.events)
    if (e.kind == EventKind::departure)
      out.push_back(e.time - times[e.peer - 1].arrival);
  return out;
}

struct OrderStat {
  int order = 0;  // arrival index within a busy period, 1-based
  double mean_download_time = 0.0;
  int samples = 0;
};

// Mean download time grouped by within-busy-period arrival order.  Peers
// still active when the trace ends are excluded.
inline std::vector<OrderStat> download_time_by_order(const EventTrace& trace) {
  const auto times = detail::peer_times(trace);
  std::map<int, std::pair<double, int>> acc;
  for (const auto& period : busy_periods(trace)) {
    for (std::size_t k = 0; k < period.members.size(); ++k) {
      const auto& pt = times[period.members[k] - 1];
      if (pt.departure < 0) continue;
      auto& [total, n] = acc[static_cast<int>(k) + 1];
      total += pt.departure - pt.arrival;
      ++n;
    }
  }
  std::vector<OrderStat> out;
  for (const auto& [order, v] : acc)
    out.push_back({order, v.first / v.second, v.second});
  return out;
}

// Gaps between consecutive departures within the same busy period (the gap
// spanning an empty swarm is never included).
inline std::vector<double> interdeparture_gaps(const EventTrace& trace) {
  std::vector<double> gaps;
  double last_departure = -1.0;
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::departure) {
      if (last_departure >= 0) gaps.push_back(e.time - last_departure);
      last_departure = e.leechers_present == 0 ? -1.0 : e.time;
    }
  }
  return gaps;
}

struct CcdfPoint {
  double gap = 0.0;
  double fraction_ge = 0.0;  // fraction of gaps >= this one
};

inline std::vector<CcdfPoint> interdeparture_ccdf(const EventTrace& trace) {
  std::vector<double> gaps = interdeparture_gaps(trace);
  std::sort(gaps.begin(), gaps.end());
  std::vector<CcdfPoint> points;
  const double total = static_cast<double>(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (i > 0 && gaps[i] == gaps[i - 1]) continue;
    points.push_back({gaps[i], static_cast<double>(gaps.size() - i) / total});
  }
  return points;
}

// Fraction of gaps >= x under a stepwise CCDF.
inline double ccdf_at(const std::vector<CcdfPoint>& points, double x) {
  for (const auto& p : points)
    if (p.gap >= x) return p.fraction_ge;
  return 0.0;
}

struct SyncSample {
  double time = 0.0;
  int leechers = 0;
  int synchronized = 0;
};

// A leecher is synchronized when no other present leecher owns more than
// `threshold` pieces it lacks.  Requires at least two leechers, otherwise the
// count is zero (a lone peer has nobody to be synchronized with).
inline std::vector<SyncSample> synchronized_series(const EventTrace& trace,
                                                   int threshold = 50) {
  std::vector<SyncSample> out;
  for (const auto& snap : trace.snapshots) {
    SyncSample s;
    s.time = snap.time;
    s.leechers = static_cast<int>(snap.ids.size());
    if (s.leechers >= 2) {
      for (std::size_t i = 0; i < snap.bitfields.size(); ++i) {
        bool in_sync = true;
        for (std::size_t j = 0; j < snap.bitfields.size() && in_sync; ++j) {
          if (j == i) continue;
          in_sync = snap.bitfields[i].interesting_from(snap.bitfields[j]) <= threshold;
        }
        if (in_sync) ++s.synchronized;
      }
    }
    out.push_back(s);
  }
  return out;
}

struct DistributionSummary {
  double min = 0.0;
  double p25 = 0.0;
  double mean = 0.0;
  double p75 = 0.0;
  double max = 0.0;
};

inline double percentile(std::vector<double> sorted, double p) {
  const double rank = p * (sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(rank);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double w = rank - lo;
  return sorted[lo] * (1 - w) + sorted[hi] * w;
}

inline DistributionSummary download_time_summary(const EventTrace& trace) {
  std::vector<double> times = completed_download_times(trace);
  if (times.empty())
    throw std::invalid_argument("download_time_summary: no completed download");
  std::sort(times.begin(), times.end());
  DistributionSummary s;
  s.min = times.front();
  s.max = times.back();
  s.p25 = percentile(times, 0.25);
  s.p75 = percentile(times, 0.75);
  double total = 0;
  for (double t : times) total += t;
  s.mean = total / times.size();
  return s;
}

struct BurstCount {
  int period = 0;      // busy period index
  int companions = 0;  // departures leaving within the initiator's burst, minus the initiator
};

// A burst is a maximal run of consecutive departures whose successive gaps
// stay within `window`.  Reports the burst containing each period initiator.
inline std::vector<BurstCount> burst_sizes(const EventTrace& trace,
                                           double window = 10.0) {
  const auto times = detail::peer_times(trace);
  const auto periods = busy_periods(trace);

  std::vector<BurstCount> out;
  for (std::size_t pi = 0; pi < periods.size(); ++pi) {
    const auto& period = periods[pi];
    if (period.members.empty()) continue;
    const double f_departure = times[period.members.front() - 1].departure;
    if (f_departure < 0) continue;  // initiator still active at trace end

    std::vector<double> departures;
    for (PeerId id : period.members) {
      const double d = times[id - 1].departure;
      if (d >= 0) departures.push_back(d);
    }
    std::sort(departures.begin(), departures.end());

    int burst = 0;
    bool initiator_inside = false;
    for (std::size_t k = 0; k < departures.size(); ++k) {
      if (k > 0 && departures[k] - departures[k - 1] > window) {
        if (initiator_inside) break;
        burst = 0;
        initiator_inside = false;
      }
      ++burst;
      initiator_inside = initiator_inside || departures[k] == f_departure;
    }
    if (initiator_inside)
      out.push_back({static_cast<int>(pi), burst - 1});
  }
  return out;
}

// Time-averaged leecher count over [0, end_time].
inline double mean_swarm_size(const EventTrace& trace) {
  if (trace.end_time <= 0) return 0.0;
  double integral = 0.0;
  double last_t = 0.0;
  int present = 0;
  for (const auto& e : trace.events) {
    integral += present * (e.time - last_t);
    last_t = e.time;
    present = e.leechers_present;
  }
  integral += present * (trace.end_time - last_t);
  return integral / trace.end_time;
}

// ---- CSV export ----------------------------------------------------------

namespace detail {
inline void put_g(std::ostream& os, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  os << buf;
}
}  // namespace detail

inline void write_order_csv(std::ostream& os, const std::vector<OrderStat>& stats) {
  os << "order,mean_download_time_s,samples\n";
  for (const auto& s : stats) {
    os << s.order << ',';
    detail::put_g(os, s.mean_download_time);
    os << ',' << s.samples << '\n';
  }
}

inline void write_ccdf_csv(std::ostream& os, const std::vector<CcdfPoint>& points) {
  os << "gap_s,fraction_ge\n";
  for (const auto& p : points) {
    detail::put_g(os, p.gap);
    os << ',';
    detail::put_g(os, p.fraction_ge);
    os << '\n';
  }
}

inline void write_sync_csv(std::ostream& os, const std::vector<SyncSample>& samples) {
  os << "time_s,leechers_present,synchronized\n";
  for (const auto& s : samples) {
    detail::put_g(os, s.time);
    os << ',' << s.leechers << ',' << s.synchronized << '\n';
  }
}

inline void write_busy_periods_csv(std::ostream& os, const std::vector<BusyPeriod>& periods) {
  os << "period,start_s,end_s,members,closed\n";
  for (std::size_t i = 0; i < periods.size(); ++i) {
    os << i << ',';
    detail::put_g(os, periods[i].start);
    os << ',';
    detail::put_g(os, periods[i].end);
    os << ',' << periods[i].members.size() << ',' << (periods[i].closed ? 1 : 0) << '\n';
  }
}

inline void write_summary_csv(std::ostream& os, const DistributionSummary& s) {
  os << "min_s,p25_s,mean_s,p75_s,max_s\n";
  detail::put_g(os, s.min);
  os << ',';
  detail::put_g(os, s.p25);
  os << ',';
  detail::put_g(os, s.mean);
  os << ',';
  detail::put_g(os, s.p75);
  os << ',';
  detail::put_g(os, s.max);
  os << '\n';
}

inline void write_bursts_csv(std::ostream& os, const std::vector<BurstCount>& bursts) {
  os << "period,initiator_companions\n";
  for (const auto& b : bursts) os << b.period << ',' << b.companions << '\n';
}

}  // namespace btswarm

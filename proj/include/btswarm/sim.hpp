// Event-driven, piece-level swarm simulator.
//
// One permanent seed, full-mesh leechers, rarest-first piece selection.
// Transfers are fluid: each uploader splits its capacity equally over the
// peers it is currently sending to, rates change only at events (arrival,
// piece completion, departure), and remaining bytes are advanced exactly
// between events.  A leecher departs the instant its last piece completes.

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include "btswarm/types.hpp"

namespace btswarm {

struct Transfer {
  int piece = -1;
  PeerId uploader = 0;        // 0 = seed
  double kb_remaining = 0.0;
  double rate = 0.0;          // kB/s, constant between events

  friend bool operator==(const Transfer&, const Transfer&) = default;
};

struct PeerState {
  PeerId id = 0;              // arrival index, 1-based
  double arrival_time = 0.0;
  Bitfield bitfield;
  std::vector<Transfer> in_flight;  // incoming transfers
  Bitfield incoming_mask;           // pieces currently in flight to this peer

  bool has_incoming(int piece) const { return incoming_mask.test(piece); }

  const Transfer* incoming_from(PeerId uploader) const {
    for (const auto& t : in_flight)
      if (t.uploader == uploader) return &t;
    return nullptr;
  }
};

// Current pairwise transfer rates; derived state, recomputed at events.
struct RatePlan {
  struct Entry {
    PeerId uploader = 0;
    PeerId downloader = 0;
    int piece = -1;
    double rate = 0.0;
  };
  std::vector<Entry> entries;

  double uploader_total(PeerId id) const {
    double s = 0;
    for (const auto& e : entries)
      if (e.uploader == id) s += e.rate;
    return s;
  }
};

// Seed splits its capacity over the leechers it is actively sending to, each
// leecher splits its capacity over its active recipients.  Peers with nothing
// interesting to send simply contribute nothing.
inline RatePlan recompute_rates(const std::vector<PeerState>& peers,
                                const SwarmConfig& cfg) {
  std::vector<std::pair<PeerId, int>> out_degree;
  auto bump = [&](PeerId id) {
    for (auto& [pid, n] : out_degree)
      if (pid == id) {
        ++n;
        return;
      }
    out_degree.emplace_back(id, 1);
  };
  for (const auto& d : peers)
    for (const auto& t : d.in_flight) bump(t.uploader);

  auto degree = [&](PeerId id) {
    for (const auto& [pid, n] : out_degree)
      if (pid == id) return n;
    return 0;
  };

  RatePlan plan;
  for (const auto& d : peers)
    for (const auto& t : d.in_flight) {
      const double cap = t.uploader == 0 ? cfg.seed_capacity : cfg.leecher_capacity;
      plan.entries.push_back({t.uploader, d.id, t.piece, cap / degree(t.uploader)});
    }
  return plan;
}

// Rarest-first selection: among pieces the uploader owns, the downloader
// lacks, and that are not already in flight to the downloader, pick one with
// the fewest replicas; ties are broken uniformly with the run's rng.
inline std::optional<int> pick_piece(const PeerState& downloader,
                                     const PeerState& uploader,
                                     const std::vector<int>& replicas,
                                     std::mt19937_64& rng) {
  const auto& up = uploader.bitfield.words();
  const auto& own = downloader.bitfield.words();
  const auto& pending = downloader.incoming_mask.words();

  int best = -1;
  int best_count = std::numeric_limits<int>::max();
  std::uint64_t ties = 0;
  for (std::size_t w = 0; w < own.size(); ++w) {
    std::uint64_t cand = up[w] & ~own[w] & ~pending[w];
    while (cand) {
      const int piece = static_cast<int>(w * 64) + std::countr_zero(cand);
      cand &= cand - 1;
      const int r = replicas[piece];
      if (r < best_count) {
        best_count = r;
        best = piece;
        ties = 1;
      } else if (r == best_count) {
        ++ties;
        if (rng() % ties == 0) best = piece;  // reservoir keeps ties uniform
      }
    }
  }
  if (best < 0) return std::nullopt;
  return best;
}

enum class EventKind { arrival, piece_complete, departure };

struct TraceEvent {
  double time = 0.0;
  EventKind kind = EventKind::arrival;
  PeerId peer = 0;
  int piece = -1;                 // -1 for arrival/departure rows
  int leechers_present = 0;       // after the event
  std::vector<int> piece_counts;  // per present leecher, arrival order; optional

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct Snapshot {
  double time = 0.0;
  std::vector<PeerId> ids;
  std::vector<Bitfield> bitfields;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct EventTrace {
  std::vector<TraceEvent> events;
  std::vector<Snapshot> snapshots;
  double end_time = 0.0;
  int piece_count = 0;
  double piece_size = 0.0;

  // Transfer accounting.  uploaded_kb integrates rate over time; the other
  // three attribute the same bytes by outcome, so uploaded_kb should equal
  // their sum (and downloaded_kb()) up to float error.
  double uploaded_kb = 0.0;
  double completed_kb = 0.0;
  double wasted_kb = 0.0;     // progress lost when an uploader departed
  double inflight_kb = 0.0;   // progress still pending at end of run

  double downloaded_kb() const { return completed_kb + wasted_kb + inflight_kb; }
};

struct SimOptions {
  double snapshot_interval = 10.0;  // seconds between bitfield snapshots; 0 disables
  bool record_piece_counts = false; // attach per-peer piece counts to every event
  int max_recipients = 0;           // concurrent recipients per uploader; 0 = unlimited
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Simulator {
 public:
  Simulator(const SwarmConfig& cfg, const SimOptions& opts)
      : cfg_(cfg),
        opts_(opts),
        avail_(cfg.piece_count, 1),  // the seed owns every piece
        arrival_rng_(splitmix64(cfg.rng_seed ^ 0x61727276ULL)),
        piece_rng_(splitmix64(cfg.rng_seed ^ 0x70696365ULL)) {
    seed_.id = 0;
    seed_.bitfield = Bitfield(cfg.piece_count);
    seed_.bitfield.fill();
    seed_.incoming_mask = Bitfield(cfg.piece_count);
    trace_.piece_count = cfg.piece_count;
    trace_.piece_size = cfg.piece_size;
  }

  EventTrace run() {
    const bool open_ended = std::holds_alternative<PoissonArrivals>(cfg_.arrivals);
    if (open_ended) {
      poisson_rate_ = std::get<PoissonArrivals>(cfg_.arrivals).rate;
      next_arrival_ = exp_gap();
    } else {
      schedule_ = &std::get<ScheduleArrivals>(cfg_.arrivals).times;
      next_arrival_ = schedule_->empty() ? kInf : schedule_->front();
    }
    if (opts_.snapshot_interval > 0) next_sample_ = opts_.snapshot_interval;

    for (;;) {
      if (!open_ended && peers_.empty() && next_arrival_ == kInf) break;

      double completion_at = kInf;
      std::size_t cpeer = 0, ctransfer = 0;
      for (std::size_t pi = 0; pi < peers_.size(); ++pi)
        for (std::size_t ti = 0; ti < peers_[pi].in_flight.size(); ++ti) {
          const Transfer& t = peers_[pi].in_flight[ti];
          const double at = now_ + t.kb_remaining / t.rate;
          if (at < completion_at) {
            completion_at = at;
            cpeer = pi;
            ctransfer = ti;
          }
        }

      const double next = std::min({completion_at, next_arrival_, next_sample_});
      if (open_ended && next > cfg_.sim_duration) {
        advance_to(cfg_.sim_duration);
        break;
      }
      assert(next < kInf && "no event possible while leechers remain");

      advance_to(next);
      if (completion_at <= next_arrival_ && completion_at <= next_sample_) {
        complete_transfer(cpeer, ctransfer);
        reassign();
      } else if (next_arrival_ <= next_sample_) {
        admit_leecher();
        reassign();
      } else {
        take_snapshot();
      }
    }

    trace_.end_time = now_;
    for (const auto& p : peers_)
      for (const auto& t : p.in_flight)
        trace_.inflight_kb += cfg_.piece_size - t.kb_remaining;
    return std::move(trace_);
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  double exp_gap() {
    const double u = (arrival_rng_() >> 11) * 0x1.0p-53;  // [0, 1)
    return -std::log1p(-u) / poisson_rate_;
  }

  PeerState& peer_by_id(PeerId id) {
    for (auto& p : peers_)
      if (p.id == id) return p;
    throw std::logic_error("peer not present");
  }

  void advance_to(double t) {
    const double dt = t - now_;
    if (dt > 0) {
      for (auto& p : peers_)
        for (auto& tr : p.in_flight) {
          const double progress = std::min(tr.rate * dt, tr.kb_remaining);
          tr.kb_remaining -= progress;
          trace_.uploaded_kb += progress;
        }
    }
    now_ = t;
  }

  void emit(EventKind kind, PeerId peer, int piece) {
    TraceEvent e;
    e.time = now_;
    e.kind = kind;
    e.peer = peer;
    e.piece = piece;
    e.leechers_present = static_cast<int>(peers_.size());
    if (opts_.record_piece_counts) {
      e.piece_counts.reserve(peers_.size());
      for (const auto& p : peers_) e.piece_counts.push_back(p.bitfield.count());
    }
    trace_.events.push_back(std::move(e));
  }

  void admit_leecher() {
    PeerState p;
    p.id = next_id_++;
    p.arrival_time = now_;
    p.bitfield = Bitfield(cfg_.piece_count);
    p.incoming_mask = Bitfield(cfg_.piece_count);
    peers_.push_back(std::move(p));
    emit(EventKind::arrival, peers_.back().id, -1);

    if (schedule_) {
      ++schedule_pos_;
      next_arrival_ = schedule_pos_ < schedule_->size() ? (*schedule_)[schedule_pos_] : kInf;
    } else {
      next_arrival_ += exp_gap();
    }
  }

  void complete_transfer(std::size_t peer_index, std::size_t transfer_index) {
    PeerState& d = peers_[peer_index];
    const Transfer done = d.in_flight[transfer_index];
    trace_.uploaded_kb += done.kb_remaining;  // flush sub-ulp residue
    trace_.completed_kb += cfg_.piece_size;
    d.in_flight.erase(d.in_flight.begin() + transfer_index);
    d.incoming_mask.reset(done.piece);
    assert(!d.bitfield.test(done.piece) && "piece completed twice");
    d.bitfield.set(done.piece);
    ++avail_[done.piece];
    emit(EventKind::piece_complete, d.id, done.piece);

    if (d.bitfield.complete()) remove_peer(peer_index);
  }

  void remove_peer(std::size_t peer_index) {
    const PeerId id = peers_[peer_index].id;
    for (int piece = 0; piece < cfg_.piece_count; ++piece) --avail_[piece];
    peers_.erase(peers_.begin() + peer_index);
    for (auto& other : peers_) {
      for (std::size_t ti = other.in_flight.size(); ti-- > 0;) {
        if (other.in_flight[ti].uploader == id) {
          trace_.wasted_kb += cfg_.piece_size - other.in_flight[ti].kb_remaining;
          other.incoming_mask.reset(other.in_flight[ti].piece);
          other.in_flight.erase(other.in_flight.begin() + ti);
        }
      }
    }
    emit(EventKind::departure, id, -1);
  }

  void assign_from(const PeerState& uploader) {
    int out_degree = 0;
    for (const auto& p : peers_)
      if (p.incoming_from(uploader.id)) ++out_degree;

    for (auto& d : peers_) {
      if (d.id == uploader.id) continue;
      if (opts_.max_recipients > 0 && out_degree >= opts_.max_recipients) break;
      if (d.incoming_from(uploader.id)) continue;
      if (auto piece = pick_piece(d, uploader, avail_, piece_rng_)) {
        d.in_flight.push_back({*piece, uploader.id, cfg_.piece_size, 0.0});
        d.incoming_mask.set(*piece);
        ++out_degree;
      }
    }
  }

  void reassign() {
    assign_from(seed_);
    for (const auto& u : peers_) assign_from(u);

    const RatePlan plan = recompute_rates(peers_, cfg_);
    std::size_t k = 0;
    for (auto& d : peers_)
      for (auto& tr : d.in_flight) tr.rate = plan.entries[k++].rate;

    assert(check_state());
  }

  bool check_state() const {
    if (!peers_.empty()) {
      bool any = false;
      for (const auto& p : peers_) any = any || !p.in_flight.empty();
      if (!any) return false;  // seed can always serve someone
    }
    for (const auto& p : peers_) {
      Bitfield seen(cfg_.piece_count);
      for (const auto& t : p.in_flight) {
        if (p.bitfield.test(t.piece)) return false;
        if (seen.test(t.piece)) return false;  // two uploaders for one piece
        seen.set(t.piece);
      }
      if (!(seen == p.incoming_mask)) return false;
    }
    return true;
  }

  void take_snapshot() {
    Snapshot s;
    s.time = now_;
    for (const auto& p : peers_) {
      s.ids.push_back(p.id);
      s.bitfields.push_back(p.bitfield);
    }
    trace_.snapshots.push_back(std::move(s));
    next_sample_ += opts_.snapshot_interval;
  }

  SwarmConfig cfg_;
  SimOptions opts_;
  PeerState seed_;
  std::vector<PeerState> peers_;  // ascending arrival index
  std::vector<int> avail_;        // replica count per piece, seed included
  std::mt19937_64 arrival_rng_;
  std::mt19937_64 piece_rng_;
  EventTrace trace_;
  double now_ = 0.0;
  double next_arrival_ = kInf;
  double next_sample_ = kInf;
  double poisson_rate_ = 0.0;
  const std::vector<double>* schedule_ = nullptr;
  std::size_t schedule_pos_ = 0;
  PeerId next_id_ = 1;
};

}  // namespace detail

// Runs one scenario to completion.  Deterministic for a fixed config: two
// runs with the same rng_seed produce identical traces.
inline EventTrace run(const SwarmConfig& cfg, const SimOptions& opts = {}) {
  const auto errors = validate_config(cfg);
  if (!errors.empty()) throw std::invalid_argument("run: invalid config: " + errors.front());
  detail::Simulator sim(cfg, opts);
  return sim.run();
}

inline const char* event_name(EventKind k) {
  switch (k) {
    case EventKind::arrival: return "arrival";
    case EventKind::piece_complete: return "piece_complete";
    case EventKind::departure: return "departure";
  }
  return "?";
}

// CSV export, one row per event; piece left empty for arrival/departure.
inline void write_trace_csv(std::ostream& os, const EventTrace& trace) {
  os << "time,event,peer,piece,leechers_present\n";
  char buf[64];
  for (const auto& e : trace.events) {
    std::snprintf(buf, sizeof buf, "%.10g", e.time);
    os << buf << ',' << event_name(e.kind) << ',' << e.peer << ',';
    if (e.piece >= 0) os << e.piece;
    os << ',' << e.leechers_present << '\n';
  }
}

}  // namespace btswarm

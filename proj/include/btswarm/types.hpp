// Shared domain types for the swarm simulator and allocation model.
// Units are kB and seconds everywhere: capacities in kB/s, piece sizes in kB.

#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace btswarm {

// Leecher identity is its arrival index (1-based). Id 0 is the seed.
using PeerId = int;

// Per-leecher piece counts, index = arrival order (index 0 = oldest leecher).
using PieceCountVector = std::vector<int>;

struct ScheduleArrivals {
  std::vector<double> times;  // absolute arrival instants, sorted non-decreasing
  friend bool operator==(const ScheduleArrivals&, const ScheduleArrivals&) = default;
};

struct PoissonArrivals {
  double rate = 0.0;  // arrivals per second
  friend bool operator==(const PoissonArrivals&, const PoissonArrivals&) = default;
};

using ArrivalProcess = std::variant<ScheduleArrivals, PoissonArrivals>;

struct SwarmConfig {
  double seed_capacity = 64.0;     // seed uplink, kB/s
  double leecher_capacity = 64.0;  // leecher uplink, kB/s
  int piece_count = 1000;
  double piece_size = 256.0;       // kB per piece
  ArrivalProcess arrivals = PoissonArrivals{0.001};
  double sim_duration = 400000.0;  // horizon for open-ended arrival processes, s
  std::uint64_t rng_seed = 1;

  double content_kb() const { return piece_count * piece_size; }

  friend bool operator==(const SwarmConfig&, const SwarmConfig&) = default;
};

// Returns one message per violated invariant; empty means the config is valid.
inline std::vector<std::string> validate_config(const SwarmConfig& cfg) {
  std::vector<std::string> errors;
  if (!(cfg.seed_capacity > 0)) errors.push_back("seed capacity must be positive");
  if (!(cfg.leecher_capacity > 0)) errors.push_back("leecher capacity must be positive");
  if (cfg.piece_count < 1) errors.push_back("piece count must be at least 1");
  if (!(cfg.piece_size > 0)) errors.push_back("piece size must be positive");
  if (const auto* sched = std::get_if<ScheduleArrivals>(&cfg.arrivals)) {
    for (std::size_t i = 1; i < sched->times.size(); ++i) {
      if (sched->times[i] < sched->times[i - 1]) {
        errors.push_back("schedule not sorted");
        break;
      }
    }
    if (!sched->times.empty() && sched->times.front() < 0)
      errors.push_back("schedule times must be non-negative");
  } else {
    const auto& poisson = std::get<PoissonArrivals>(cfg.arrivals);
    if (!(poisson.rate > 0)) errors.push_back("poisson rate must be positive");
    if (!(cfg.sim_duration > 0)) errors.push_back("sim duration must be positive");
  }
  return errors;
}

// Set of pieces a peer owns. High bits past size() are kept zero.
class Bitfield {
 public:
  Bitfield() = default;
  explicit Bitfield(int piece_count)
      : size_(piece_count), words_((piece_count + 63) / 64, 0) {}

  int size() const { return size_; }
  int count() const { return count_; }
  bool complete() const { return count_ == size_; }

  bool test(int piece) const {
    return (words_[piece >> 6] >> (piece & 63)) & 1u;
  }

  void set(int piece) {
    std::uint64_t& w = words_[piece >> 6];
    const std::uint64_t m = std::uint64_t{1} << (piece & 63);
    if (!(w & m)) {
      w |= m;
      ++count_;
    }
  }

  void reset(int piece) {
    std::uint64_t& w = words_[piece >> 6];
    const std::uint64_t m = std::uint64_t{1} << (piece & 63);
    if (w & m) {
      w &= ~m;
      --count_;
    }
  }

  void fill() {
    for (auto& w : words_) w = ~std::uint64_t{0};
    trim_tail();
    count_ = size_;
  }

  // Number of pieces `other` owns that this peer lacks (interest from other).
  int interesting_from(const Bitfield& other) const {
    int n = 0;
    for (std::size_t w = 0; w < words_.size(); ++w)
      n += std::popcount(other.words_[w] & ~words_[w]);
    return n;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

  friend bool operator==(const Bitfield&, const Bitfield&) = default;

 private:
  void trim_tail() {
    if (size_ & 63) words_.back() &= (std::uint64_t{1} << (size_ & 63)) - 1;
  }

  int size_ = 0;
  int count_ = 0;
  std::vector<std::uint64_t> words_;
};

// Pairwise upload-rate allocation plus the seed's equal share, kB/s.
struct RateMatrix {
  int n_leechers = 0;
  double seed_share = 0.0;       // what each leecher receives from the seed
  std::vector<double> upload;    // row-major, upload[i * n + j] = rate i -> j

  double operator()(int i, int j) const { return upload[i * n_leechers + j]; }
  double& at(int i, int j) { return upload[i * n_leechers + j]; }

  double row_sum(int i) const {
    double s = 0;
    for (int j = 0; j < n_leechers; ++j) s += (*this)(i, j);
    return s;
  }

  double column_sum(int j) const {
    double s = 0;
    for (int i = 0; i < n_leechers; ++i) s += (*this)(i, j);
    return s;
  }
};

}  // namespace btswarm

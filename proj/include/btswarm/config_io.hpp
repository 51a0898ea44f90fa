// Flat text configuration format and the built-in scenario presets.
//
//   seed_capacity = 64          # kB/s
//   leecher_capacity = 64       # kB/s
//   piece_count = 1000
//   piece_size = 256            # kB
//   sim_duration = 400000       # s
//   rng_seed = 1
//   [arrivals]
//   poisson_rate = 0.001        # or: schedule = 10, 250, 490, 730, 1330
//
// '#' starts a comment, keys are one per line, numbers use '.' decimals.

#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "btswarm/types.hpp"

namespace btswarm {

struct ParsedConfig {
  SwarmConfig config;
  std::vector<std::string> errors;

  bool ok() const { return errors.empty(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  const std::string tmp(s);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size() && !tmp.empty();
}

inline bool parse_u64(std::string_view s, std::uint64_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace detail

inline ParsedConfig parse_config(std::istream& in) {
  ParsedConfig result;
  SwarmConfig& cfg = result.config;
  bool in_arrivals = false;
  bool have_poisson = false;
  bool have_schedule = false;
  std::string line;
  int line_no = 0;

  auto fail = [&](const std::string& msg) {
    result.errors.push_back("line " + std::to_string(line_no) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s(line);
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s == "[arrivals]") {
        in_arrivals = true;
      } else {
        fail("unknown section " + std::string(s));
      }
      continue;
    }

    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      fail("expected key = value");
      continue;
    }
    const std::string_view key = detail::trim(s.substr(0, eq));
    const std::string_view value = detail::trim(s.substr(eq + 1));

    double d = 0;
    if (!in_arrivals) {
      if (key == "seed_capacity") {
        if (detail::parse_double(value, d)) cfg.seed_capacity = d; else fail("bad number for seed_capacity");
      } else if (key == "leecher_capacity") {
        if (detail::parse_double(value, d)) cfg.leecher_capacity = d; else fail("bad number for leecher_capacity");
      } else if (key == "piece_count") {
        if (detail::parse_double(value, d)) cfg.piece_count = static_cast<int>(d); else fail("bad number for piece_count");
      } else if (key == "piece_size") {
        if (detail::parse_double(value, d)) cfg.piece_size = d; else fail("bad number for piece_size");
      } else if (key == "sim_duration") {
        if (detail::parse_double(value, d)) cfg.sim_duration = d; else fail("bad number for sim_duration");
      } else if (key == "rng_seed") {
        std::uint64_t seed = 0;
        if (detail::parse_u64(value, seed)) cfg.rng_seed = seed; else fail("bad integer for rng_seed");
      } else {
        fail("unknown key " + std::string(key));
      }
    } else {
      if (key == "poisson_rate") {
        if (detail::parse_double(value, d)) {
          cfg.arrivals = PoissonArrivals{d};
          have_poisson = true;
        } else {
          fail("bad number for poisson_rate");
        }
      } else if (key == "schedule") {
        ScheduleArrivals sched;
        std::string token;
        std::istringstream list{std::string(value)};
        bool bad = false;
        while (std::getline(list, token, ',')) {
          double t = 0;
          if (detail::parse_double(detail::trim(token), t)) sched.times.push_back(t); else bad = true;
        }
        if (bad) {
          fail("bad number in schedule");
        } else {
          cfg.arrivals = std::move(sched);
          have_schedule = true;
        }
      } else {
        fail("unknown key " + std::string(key) + " in [arrivals]");
      }
    }
  }

  if (have_poisson && have_schedule)
    result.errors.push_back("both poisson_rate and schedule given");
  if (!have_poisson && !have_schedule)
    result.errors.push_back("missing [arrivals] section with poisson_rate or schedule");

  if (result.ok()) {
    for (auto& msg : validate_config(cfg)) result.errors.push_back(std::move(msg));
  }
  return result;
}

// Canonical serialization; doubles keep full precision so a written config
// parses back to an identical SwarmConfig.
inline std::string write_config(const SwarmConfig& cfg) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::string out;
  out += "seed_capacity = " + num(cfg.seed_capacity) + "\n";
  out += "leecher_capacity = " + num(cfg.leecher_capacity) + "\n";
  out += "piece_count = " + std::to_string(cfg.piece_count) + "\n";
  out += "piece_size = " + num(cfg.piece_size) + "\n";
  out += "sim_duration = " + num(cfg.sim_duration) + "\n";
  out += "rng_seed = " + std::to_string(cfg.rng_seed) + "\n";
  out += "[arrivals]\n";
  if (const auto* poisson = std::get_if<PoissonArrivals>(&cfg.arrivals)) {
    out += "poisson_rate = " + num(poisson->rate) + "\n";
  } else {
    const auto& sched = std::get<ScheduleArrivals>(cfg.arrivals);
    out += "schedule = ";
    for (std::size_t i = 0; i < sched.times.size(); ++i) {
      if (i) out += ", ";
      out += num(sched.times[i]);
    }
    out += "\n";
  }
  return out;
}

struct ScenarioPreset {
  std::string name;
  std::string description;
  SwarmConfig config;
};

// Canned scenarios; capacities in kB/s, 1000 x 256 kB content unless noted.
inline const std::vector<ScenarioPreset>& presets() {
  static const std::vector<ScenarioPreset> list = [] {
    std::vector<ScenarioPreset> v;

    auto base = SwarmConfig{};
    base.seed_capacity = 64;
    base.leecher_capacity = 64;
    base.piece_count = 1000;
    base.piece_size = 256;
    base.rng_seed = 1;

    {
      SwarmConfig c = base;
      c.piece_count = 10;
      c.arrivals = ScheduleArrivals{{0.0}};
      v.push_back({"single-leecher", "one leecher, 10 pieces, no contention", c});
    }
    {
      SwarmConfig c = base;
      c.arrivals = ScheduleArrivals{{10, 610, 850, 1090, 1330}};
      v.push_back({"fig1-arrivals", "five leechers, gaps 10s/10min/4min/4min/4min", c});
    }
    {
      SwarmConfig c = base;
      c.arrivals = ScheduleArrivals{{10, 250, 490, 730, 1330}};
      v.push_back({"fig2-arrivals", "five leechers, gaps 10s/4min/4min/4min/10min", c});
    }
    for (double cs : {48.0, 64.0, 96.0, 128.0}) {
      SwarmConfig c = base;
      c.seed_capacity = cs;
      c.arrivals = PoissonArrivals{0.001};
      c.sim_duration = 400000;
      char name[32];
      std::snprintf(name, sizeof name, "poisson-cs%d", static_cast<int>(cs));
      v.push_back({name, "poisson arrivals at 1/1000 s, c_l = 64", c});
      std::snprintf(name, sizeof name, "table1-cs%d", static_cast<int>(cs));
      v.push_back({name, "burst-bound scenario, lambda = 1/1000, 256000 kB", c});
    }
    {
      // small content, busier swarm: 80 x 250 kB = 20000 kB at 50 kB/s
      SwarmConfig c;
      c.seed_capacity = 50;
      c.leecher_capacity = 50;
      c.piece_count = 80;
      c.piece_size = 250;
      c.arrivals = PoissonArrivals{1.0 / 125.0};
      c.sim_duration = 5000;
      c.rng_seed = 1;
      v.push_back({"unpopular-20mb", "20 MB content, arrivals every ~125 s", c});
    }
    return v;
  }();
  return list;
}

inline const ScenarioPreset* find_preset(std::string_view name) {
  for (const auto& p : presets())
    if (p.name == name) return &p;
  return nullptr;
}

}  // namespace btswarm

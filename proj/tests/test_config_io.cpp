#include <catch2/catch_amalgamated.hpp>
#include <sstream>

#include "btswarm/config_io.hpp"

using namespace btswarm;
using Catch::Approx;

namespace {
ParsedConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}
}  // namespace

TEST_CASE("parse a poisson config") {
  const auto r = parse(
      "# comment\n"
      "seed_capacity = 48\n"
      "leecher_capacity = 64\n"
      "piece_count = 1000\n"
      "piece_size = 256   # kB\n"
      "sim_duration = 400000\n"
      "rng_seed = 9\n"
      "\n"
      "[arrivals]\n"
      "poisson_rate = 0.001\n");
  REQUIRE(r.ok());
  CHECK(r.config.seed_capacity == 48);
  CHECK(r.config.rng_seed == 9);
  CHECK(std::get<PoissonArrivals>(r.config.arrivals).rate == Approx(0.001));
}

TEST_CASE("parse a schedule config") {
  const auto r = parse(
      "seed_capacity = 64\nleecher_capacity = 64\npiece_count = 1000\n"
      "piece_size = 256\n[arrivals]\nschedule = 10, 250, 490, 730, 1330\n");
  REQUIRE(r.ok());
  const auto& sched = std::get<ScheduleArrivals>(r.config.arrivals);
  CHECK(sched.times == std::vector<double>{10, 250, 490, 730, 1330});
}

TEST_CASE("config errors are collected, not thrown") {
  CHECK(!parse("bogus = 1\n[arrivals]\npoisson_rate = 0.001\n").ok());
  CHECK(!parse("seed_capacity = x\n[arrivals]\npoisson_rate = 0.001\n").ok());
  CHECK(!parse("seed_capacity = 64\n").ok());  // no arrivals section
  CHECK(!parse("[arrivals]\npoisson_rate = 0.001\nschedule = 1,2\n").ok());

  const auto r = parse("seed_capacity = 0\n[arrivals]\npoisson_rate = 0.001\n");
  REQUIRE(!r.ok());
  bool found = false;
  for (const auto& e : r.errors) found = found || e == "seed capacity must be positive";
  CHECK(found);
}

TEST_CASE("configs round-trip through the text format") {
  SwarmConfig cfg;
  cfg.seed_capacity = 0.25;
  cfg.leecher_capacity = 0.25;
  cfg.piece_count = 2000;
  cfg.piece_size = 1.0;
  cfg.sim_duration = 12345.678;
  cfg.rng_seed = 424242;
  cfg.arrivals = ScheduleArrivals{{0, 1, 2.5, 4000.125}};

  const auto parsed = parse(write_config(cfg));
  REQUIRE(parsed.ok());
  CHECK(parsed.config == cfg);

  cfg.arrivals = PoissonArrivals{1.0 / 3.0};  // not exactly representable in decimal
  const auto parsed2 = parse(write_config(cfg));
  REQUIRE(parsed2.ok());
  CHECK(parsed2.config == cfg);
}

TEST_CASE("presets match their scenarios") {
  const auto* fig2 = find_preset("fig2-arrivals");
  REQUIRE(fig2 != nullptr);
  const auto& sched = std::get<ScheduleArrivals>(fig2->config.arrivals);
  CHECK(sched.times == std::vector<double>{10, 250, 490, 730, 1330});
  CHECK(fig2->config.seed_capacity == 64);
  CHECK(fig2->config.piece_count == 1000);
  CHECK(fig2->config.piece_size == 256);

  const auto* t1 = find_preset("table1-cs48");
  REQUIRE(t1 != nullptr);
  CHECK(t1->config.seed_capacity == 48);
  CHECK(t1->config.leecher_capacity == 64);
  CHECK(t1->config.content_kb() == 256000.0);
  CHECK(std::get<PoissonArrivals>(t1->config.arrivals).rate == Approx(0.001));

  const auto* single = find_preset("single-leecher");
  REQUIRE(single != nullptr);
  CHECK(single->config.piece_count == 10);

  CHECK(find_preset("no-such-preset") == nullptr);

  for (const auto& p : presets()) CHECK(validate_config(p.config).empty());
}

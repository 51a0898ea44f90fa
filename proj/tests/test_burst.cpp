#include <catch2/catch_amalgamated.hpp>

#include "btswarm/burst.hpp"

using namespace btswarm;
using Catch::Approx;

TEST_CASE("poisson quantile by pmf summation") {
  CHECK(poisson_quantile(4.0, 0.99) == 9);
  CHECK(poisson_quantile(0.0, 0.99) == 0);
  CHECK(poisson_quantile(16.0 / 3.0, 0.99) == 11);
  CHECK(poisson_quantile(2000.0, 0.99) > 2000);  // log-space recurrence survives
  CHECK_THROWS_AS(poisson_quantile(4.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(poisson_quantile(4.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(poisson_quantile(-1.0, 0.5), std::invalid_argument);
}

TEST_CASE("burst bounds, slow seed") {
  const BurstBounds b48 = burst_bounds(0.001, 256000, 48, 64);
  CHECK(b48.download_time == Approx(256000.0 / 48.0));
  CHECK(b48.expected_arrivals == Approx(5.3333).epsilon(1e-4));
  CHECK(b48.n99 == 11);
  CHECK(b48.d_min == Approx(69.8182).epsilon(1e-4));
  CHECK(b48.d_max == Approx(268.0).epsilon(1e-9));
  CHECK(b48.b_min == Approx(1.6667).epsilon(1e-3));
  CHECK(b48.b_max == Approx(4.378).epsilon(1e-3));

  const BurstBounds b64 = burst_bounds(0.001, 256000, 64, 64);
  CHECK(b64.expected_arrivals == Approx(4.0));
  CHECK(b64.n99 == 9);
  CHECK(b64.b_min == Approx(0.400).epsilon(1e-3));
  CHECK(b64.b_max == Approx(1.895).epsilon(1e-3));
}

TEST_CASE("burst bounds clamp at zero for fast seeds") {
  const BurstBounds b96 = burst_bounds(0.001, 256000, 96, 64);
  CHECK(b96.expected_arrivals == Approx(8.0 / 3.0).epsilon(1e-6));
  CHECK(b96.d_min == Approx(76.0));
  CHECK(b96.b_min == 0.0);
  CHECK(b96.b_max == 0.0);

  const BurstBounds b128 = burst_bounds(0.001, 256000, 128, 64);
  CHECK(b128.b_min == 0.0);
  CHECK(b128.b_max == 0.0);
}

TEST_CASE("burst ratios shrink as the seed speeds up") {
  double prev_min = 1.0, prev_max = 1.0;
  for (double cs : {48.0, 64.0, 96.0, 128.0}) {
    const BurstBounds b = burst_bounds(0.001, 256000, cs, 64);
    const double rmin = b.b_min / b.expected_arrivals;
    const double rmax = b.b_max / b.expected_arrivals;
    CHECK(rmin <= prev_min + 1e-12);
    CHECK(rmax <= prev_max + 1e-12);
    prev_min = rmin;
    prev_max = rmax;
  }
}

TEST_CASE("extreme rates come from the two ends of the split when the seed is slow") {
  for (double cs : {48.0, 64.0}) {
    const BurstBounds b = burst_bounds(0.001, 256000, cs, 64);
    const int swarm = b.n99 + 1;
    CHECK(b.d_min == Approx(ab_scenario(swarm, 1, cs, 64).rate_b));
    CHECK(b.d_max == Approx(ab_scenario(swarm, swarm - 1, cs, 64).rate_b));
  }
}

TEST_CASE("no expected companions when the swarm is quiet") {
  const BurstBounds b = burst_bounds(1e-6, 1000, 50, 50);  // lambda T = 2e-5
  CHECK(b.n99 == 0);
  CHECK(b.b_min == 0.0);
  CHECK(b.b_max == 0.0);
  CHECK(b.d_min == Approx(50.0));
}

TEST_CASE("bounds are ordered and within the arrival expectation") {
  for (double cs : {40.0, 48.0, 64.0, 80.0, 96.0, 128.0}) {
    const BurstBounds b = burst_bounds(0.001, 256000, cs, 64);
    CHECK(b.b_min >= 0.0);
    CHECK(b.b_min <= b.b_max + 1e-12);
    CHECK(b.b_max <= b.expected_arrivals + 1e-12);
    CHECK(b.d_min <= b.d_max + 1e-12);
    CHECK(b.d_min >= cs / (b.n99 + 1) - 1e-12);
  }
}

TEST_CASE("predict row carries the fast-seed marker") {
  const BurstBounds b96 = burst_bounds(0.001, 256000, 96, 64);
  CHECK(format_predict_row(b96, 96, 64).find("fast-seed") != std::string::npos);
  const BurstBounds b48 = burst_bounds(0.001, 256000, 48, 64);
  CHECK(format_predict_row(b48, 48, 64).find("fast-seed") == std::string::npos);
  CHECK(format_predict_row(b48, 48, 64) == "48.000,5.333,1.667,4.378,0.312,0.821,-");
}

TEST_CASE("invalid burst arguments are rejected") {
  CHECK_THROWS_AS(burst_bounds(0, 256000, 48, 64), std::invalid_argument);
  CHECK_THROWS_AS(burst_bounds(0.001, 0, 48, 64), std::invalid_argument);
  CHECK_THROWS_AS(burst_bounds(0.001, 256000, 0, 64), std::invalid_argument);
  CHECK_THROWS_AS(burst_bounds(0.001, 256000, 48, 0), std::invalid_argument);
}

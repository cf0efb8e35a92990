#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "satcache/linkbudget.hpp"
#include "satcache/rng.hpp"
#include "testutil.hpp"

using namespace satcache;

TEST_CASE("shannon efficiency at 0 dB is exactly one bit/s/Hz") {
  CHECK(shannon_efficiency(0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("shannon efficiency at the reported coverage corners") {
  // log2(1 + 10^(snr/10)) evaluated independently and frozen.
  CHECK(shannon_efficiency(4.08) ==
        doctest::Approx(1.8313040560091862).epsilon(1e-12));
  CHECK(shannon_efficiency(2.48) ==
        doctest::Approx(1.4699427237591827).epsilon(1e-12));
  CHECK(shannon_efficiency(9.33) ==
        doctest::Approx(3.2585759759616915).epsilon(1e-12));
  CHECK(shannon_efficiency(9.22) ==
        doctest::Approx(3.2258965157949047).epsilon(1e-12));
}

TEST_CASE("modcod table is a step function") {
  auto map = EfficiencyMap::modcod_table({{0.0, 0.5}, {5.0, 1.0}});
  CHECK(efficiency_from_snr(4.9, map) == doctest::Approx(0.5));
  CHECK(efficiency_from_snr(5.0, map) == doctest::Approx(1.0));
  CHECK(efficiency_from_snr(11.7, map) == doctest::Approx(1.0));
}

TEST_CASE("snr below the first modcod threshold is unservable") {
  auto map = EfficiencyMap::modcod_table({{0.0, 0.5}, {5.0, 1.0}});
  CHECK_THROWS_AS(efficiency_from_snr(-0.1, map), Error);
  try {
    efficiency_from_snr(-0.1, map);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BelowMinimumModcod);
  }
}

TEST_CASE("modcod table rejects non-monotone entries") {
  CHECK_THROWS_AS(EfficiencyMap::modcod_table({{0.0, 1.0}, {5.0, 0.5}}), Error);
  CHECK_THROWS_AS(EfficiencyMap::modcod_table({{5.0, 0.5}, {0.0, 1.0}}), Error);
}

TEST_CASE("modcod table loads from csv") {
  std::istringstream csv("min_snr_db,efficiency\n-2.0,0.4\n3.5,1.2\n8.0,2.0\n");
  auto map = EfficiencyMap::from_csv(csv);
  CHECK(efficiency_from_snr(3.5, map) == doctest::Approx(1.2));
  CHECK(efficiency_from_snr(0.0, map) == doctest::Approx(0.4));
}

TEST_CASE("efficiency is monotone non-decreasing in snr for both modes") {
  Rng rng(11);
  auto table = EfficiencyMap::modcod_table(
      {{-1.0, 0.3}, {2.0, 0.8}, {6.0, 1.5}, {10.0, 2.8}});
  for (int trial = 0; trial < 500; ++trial) {
    double a = rng.uniform(-1.0, 20.0);
    double b = rng.uniform(-1.0, 20.0);
    if (a > b) std::swap(a, b);
    CHECK(shannon_efficiency(a) <= shannon_efficiency(b) + 1e-12);
    CHECK(efficiency_from_snr(a, table) <= efficiency_from_snr(b, table));
  }
}

TEST_CASE("shannon gains less than one bit per 3.0103 dB above 0 dB") {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    double s = rng.uniform(0.01, 30.0);
    CHECK(shannon_efficiency(s + 3.0103) < shannon_efficiency(s) + 1.0);
  }
}

TEST_CASE("snr range check flags only implausible beams") {
  auto scenario = testutil::basic_scenario(3);
  scenario.wide_beam.snr_db = 6.0;
  scenario.spot_beams[0].snr_db = 2.48;
  scenario.spot_beams[1].snr_db = 9.33;
  scenario.spot_beams[2].snr_db = 40.0;
  auto report = snr_range_check(scenario);
  CHECK(report.beams_checked == 4);
  REQUIRE(report.flagged.size() == 1);
  CHECK(report.flagged[0].beam_id == "cdn-2");
  CHECK_FALSE(report.clean());

  scenario.spot_beams[2].snr_db = 7.0;
  CHECK(snr_range_check(scenario).clean());
}

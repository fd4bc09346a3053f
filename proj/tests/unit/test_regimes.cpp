#include <doctest.h>

#include <random>

#include "overtrade/regimes.hpp"
#include "regime_reference.hpp"
#include "test_support.hpp"

using namespace overtrade;
using namespace overtrade::regimes;
using testing::ymd;

namespace {

IndexSeries series_of(const std::vector<double>& levels, Date start = ymd(2020, 1, 2)) {
  auto cal = weekday_calendar(start, levels.size());
  std::vector<IndexPoint> points;
  for (std::size_t i = 0; i < levels.size(); ++i) points.push_back({cal.days()[i], levels[i]});
  return IndexSeries(points);
}

std::vector<double> random_walk(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> step(0.0, 1.0);
  std::vector<double> x(n);
  double level = 100.0;
  for (auto& v : x) {
    level += std::round(step(rng) * 4.0) / 4.0;  // coarse steps make ties common
    v = level;
  }
  return x;
}

void check_phase_invariants(const std::vector<RegimePhase>& phases, std::size_t n) {
  REQUIRE_FALSE(phases.empty());
  CHECK(phases.front().first_index == 0);
  CHECK(phases.back().last_index == n - 1);
  for (std::size_t k = 0; k < phases.size(); ++k) {
    CHECK(phases[k].first_index <= phases[k].last_index);
    if (k > 0) {
      CHECK(phases[k].first_index == phases[k - 1].last_index + 1);
      CHECK(phases[k].kind != phases[k - 1].kind);
    }
  }
}

}  // namespace

TEST_CASE("a rising series is one bull phase") {
  std::vector<double> x;
  for (int i = 0; i < 50; ++i) x.push_back(100.0 + i);
  auto phases = date_regimes(series_of(x), 5, 5);
  REQUIRE(phases.size() == 1);
  CHECK(phases[0].kind == Regime::Bull);
  CHECK(turning_points(x, 5, 5).empty());
}

TEST_CASE("a tent is bull up to the peak and bear after it") {
  std::vector<double> x;
  for (int i = 0; i <= 30; ++i) x.push_back(100.0 + i);
  for (int i = 1; i <= 30; ++i) x.push_back(130.0 - i);
  auto s = series_of(x);
  auto phases = date_regimes(s, 10, 10);
  REQUIRE(phases.size() == 2);
  CHECK(phases[0].kind == Regime::Bull);
  CHECK(phases[0].last_index == 30);
  CHECK(phases[1].kind == Regime::Bear);
  CHECK(label_regime(s.points()[30].date, phases) == Regime::Bull);
  CHECK(label_regime(s.points()[31].date, phases) == Regime::Bear);
  CHECK_THROWS_AS(label_regime(ymd(2019, 12, 31), phases), Error);
  CHECK_THROWS_AS(label_regime(s.points().back().date.next(), phases), Error);
}

TEST_CASE("short series are refused") {
  std::vector<double> x(20, 100.0);
  CHECK_THROWS_AS(date_regimes(series_of(x), 10, 10), Error);
  x.push_back(100.0);
  CHECK_NOTHROW(date_regimes(series_of(x), 10, 10));
}

TEST_CASE("plateau peaks resolve to their first point") {
  std::vector<double> x = {1, 2, 3, 5, 5, 3, 2, 1};
  auto tps = candidate_turning_points(x, 2);
  REQUIRE(tps.size() == 1);
  CHECK(tps[0].index == 3);
}

TEST_CASE("alternation keeps the more extreme of two peaks") {
  std::vector<double> x = {1, 3, 1, 1, 1, 1, 4, 1, 1};
  auto cand = candidate_turning_points(x, 1);
  auto tps = turning_points(x, 1, 1);
  CHECK(cand.size() >= 2);
  REQUIRE_FALSE(tps.empty());
  for (std::size_t k = 1; k < tps.size(); ++k) CHECK(tps[k].kind != tps[k - 1].kind);
  CHECK(std::find(tps.begin(), tps.end(), TurningPoint{6, TurningPoint::Kind::Peak}) != tps.end());
}

TEST_CASE("index series validation") {
  CHECK_THROWS_AS(IndexSeries({{ymd(2020, 1, 2), 1.0}, {ymd(2020, 1, 2), 2.0}}), Error);
  CHECK_THROWS_AS(IndexSeries({{ymd(2020, 1, 2), 1.0}, {ymd(2020, 1, 1), 2.0}}), Error);
  CHECK_THROWS_AS(IndexSeries({{ymd(2020, 1, 2), 0.0}}), Error);
}

TEST_CASE("windowed detection matches the quadratic reference on random walks") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    auto n = 30 + rng() % 300;
    auto x = random_walk(rng, n);
    auto w = 1 + rng() % 12;
    auto min_phase = rng() % 30;
    CHECK(candidate_turning_points(x, w) == testing::reference_candidates(x, w));
    auto tps = turning_points(x, w, min_phase);
    CHECK(tps == testing::reference_turning_points(x, w, min_phase));
    for (std::size_t k = 1; k < tps.size(); ++k) {
      CHECK(tps[k].kind != tps[k - 1].kind);
      CHECK(tps[k].index - tps[k - 1].index >= min_phase);
    }
    if (n > 2 * w) check_phase_invariants(date_regimes(series_of(x), w, min_phase), n);
  }
}

TEST_CASE("extending a series along its last phase leaves earlier labels alone") {
  std::vector<double> x;
  for (int i = 0; i <= 40; ++i) x.push_back(100.0 + i);
  for (int i = 1; i <= 40; ++i) x.push_back(140.0 - i);
  auto before = date_regimes(series_of(x), 10, 10);
  for (int i = 1; i <= 30; ++i) x.push_back(100.0 - i);
  auto after = date_regimes(series_of(x), 10, 10);
  REQUIRE(after.size() == before.size());
  for (std::size_t k = 0; k + 1 < before.size(); ++k) {
    CHECK(after[k].kind == before[k].kind);
    CHECK(after[k].start == before[k].start);
    CHECK(after[k].end == before[k].end);
  }
}

TEST_CASE("phases round trip through a file") {
  testing::TempDir dir;
  std::vector<double> x = {1, 2, 3, 4, 3, 2, 1, 2, 3, 4, 5};
  auto phases = date_regimes(series_of(x), 2, 1);
  write_phases(dir / "p.tsv", phases);
  auto back = read_phases(dir / "p.tsv");
  REQUIRE(back.size() == phases.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    CHECK(back[k].kind == phases[k].kind);
    CHECK(back[k].start == phases[k].start);
    CHECK(back[k].end == phases[k].end);
  }
}

TEST_CASE("cap tier boundaries") {
  CHECK(cap_tier(1.5e11) == CapTier::Large);
  CHECK(cap_tier(1e11) == CapTier::Mid);
  CHECK(cap_tier(std::nextafter(1e11, 2e11)) == CapTier::Large);
  CHECK(cap_tier(1e10) == CapTier::Mid);
  CHECK(cap_tier(std::nextafter(1e10, 0.0)) == CapTier::Small);
  CHECK(cap_tier(0.0) == CapTier::Small);
  CHECK_THROWS_AS(cap_tier(-1.0), Error);
}

TEST_CASE("cap tier never drops as the cap grows") {
  auto rank = [](CapTier t) { return t == CapTier::Small ? 0 : t == CapTier::Mid ? 1 : 2; };
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> log_cap(8.0, 12.5);
  for (int i = 0; i < 5000; ++i) {
    double a = std::pow(10.0, log_cap(rng)), b = std::pow(10.0, log_cap(rng));
    if (a > b) std::swap(a, b);
    CHECK(rank(cap_tier(a)) <= rank(cap_tier(b)));
  }
}

TEST_CASE("exchange codes") {
  CHECK(exchange_of("600000.SH") == "SH");
  CHECK(exchange_of("000001.SZ") == "SZ");
  CHECK(exchange_of("601318") == "SH");
  CHECK(exchange_of("300750") == "SZ");
}

#include <doctest.h>

#include <atomic>
#include <random>
#include <vector>

#include "overtrade/common.hpp"
#include "test_support.hpp"

using namespace overtrade;
using testing::ymd;

TEST_CASE("dates parse, print and know their weekday") {
  auto d = Date::parse("2020-03-02");
  REQUIRE(d);
  CHECK(d->to_string() == "2020-03-02");
  CHECK(d->weekday() == 1);
  CHECK(ymd(1970, 1, 1).days == 0);
  CHECK(ymd(2024, 2, 29).next() == ymd(2024, 3, 1));
  CHECK_FALSE(Date::parse("2021-02-29"));
  CHECK_FALSE(Date::parse("2020-13-01"));
  CHECK_FALSE(Date::parse("20200301"));
  CHECK_FALSE(Date::parse(""));
}

TEST_CASE("timestamps accept both separators and optional seconds") {
  auto a = Timestamp::parse("2020-03-02 09:45");
  auto b = Timestamp::parse("2020-03-02T09:45:00");
  REQUIRE(a);
  REQUIRE(b);
  CHECK(*a == *b);
  CHECK(a->seconds == hms(9, 45));
  CHECK(b->to_string() == "2020-03-02T09:45:00");
  CHECK_FALSE(Timestamp::parse("2020-03-02 25:00"));
  CHECK_FALSE(Timestamp::parse("2020-03-02 09:60"));
  CHECK_FALSE(Timestamp::parse("2020-03-02"));
}

TEST_CASE("slot assignment examples") {
  CHECK(assign_slot(hms(9, 45)) == Slot::S1);
  CHECK(assign_slot(hms(9, 30)) == Slot::S1);
  CHECK(assign_slot(hms(10, 30)) == Slot::S2);
  CHECK(assign_slot(hms(11, 29, 59)) == Slot::S2);
  CHECK_FALSE(assign_slot(hms(11, 30)));
  CHECK_FALSE(assign_slot(hms(12, 15)));
  CHECK(assign_slot(hms(13, 0)) == Slot::S3);
  CHECK(assign_slot(hms(14, 0)) == Slot::S4);
  CHECK(assign_slot(hms(15, 0)) == Slot::S4);
  CHECK_FALSE(assign_slot(hms(15, 0, 1)));
  CHECK_FALSE(assign_slot(hms(9, 29, 59)));
}

TEST_CASE("slots partition the session and nothing else") {
  int in_session = 0;
  for (std::int32_t s = 0; s < 24 * 3600; ++s) {
    auto slot = assign_slot(s);
    bool expected = (s >= hms(9, 30) && s < hms(11, 30)) || (s >= hms(13, 0) && s <= hms(15, 0));
    REQUIRE(slot.has_value() == expected);
    if (slot) {
      ++in_session;
      CHECK(s >= slot_start(*slot));
      CHECK(s <= slot_end(*slot));
    }
  }
  CHECK(in_session == 4 * 3600 + 1);
}

TEST_CASE("slot names round trip") {
  for (auto s : kAllSlots) CHECK(parse_slot(to_string(s)) == s);
  CHECK_FALSE(parse_slot("S5"));
}

TEST_CASE("weekday calendar skips weekends") {
  auto cal = weekday_calendar(ymd(2024, 1, 5), 3);  // Friday
  REQUIRE(cal.size() == 3);
  CHECK(cal.days()[0] == ymd(2024, 1, 5));
  CHECK(cal.days()[1] == ymd(2024, 1, 8));
  CHECK(cal.days()[2] == ymd(2024, 1, 9));
  CHECK(cal.contains(ymd(2024, 1, 8)));
  CHECK_FALSE(cal.contains(ymd(2024, 1, 6)));
  CHECK(cal.index_of(ymd(2024, 1, 9)) == 2u);
}

TEST_CASE("calendar files round trip") {
  testing::TempDir dir;
  auto cal = weekday_calendar(ymd(2023, 12, 28), 7);
  write_calendar(dir / "cal.tsv", cal);
  CHECK(load_calendar(dir / "cal.tsv").days() == cal.days());
  testing::write_text(dir / "bad.tsv", "date\n2023-12-40\n");
  CHECK_THROWS_AS(load_calendar(dir / "bad.tsv"), Error);
  CHECK_THROWS_AS(load_calendar(dir / "missing.tsv"), Error);
}

TEST_CASE("escape and unescape are inverse on arbitrary bytes") {
  std::mt19937_64 rng(11);
  const std::string alphabet = "ab\\\t\n\r x\xe6\xb6\xa8";
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s;
    auto len = rng() % 20;
    for (std::size_t i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
    auto e = tsv::escape(s);
    CHECK(e.find('\t') == std::string::npos);
    CHECK(e.find('\n') == std::string::npos);
    CHECK(tsv::unescape(e) == s);
  }
}

TEST_CASE("numeric field parsing") {
  CHECK(tsv::parse_double("1.5") == 1.5);
  CHECK(tsv::parse_double(" -2 ") == -2.0);
  CHECK_FALSE(tsv::parse_double("abc"));
  CHECK_FALSE(tsv::parse_double("1.5x"));
  CHECK_FALSE(tsv::parse_double(""));
  CHECK(tsv::parse_int("42") == 42);
  CHECK_FALSE(tsv::parse_int("4.2"));
}

TEST_CASE("full precision printing round trips") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    double v = u(rng) / 7.0;
    CHECK(tsv::parse_double(tsv::full(v)) == v);
  }
  CHECK(tsv::opt_full(std::nullopt) == tsv::kNA);
}

TEST_CASE("line iteration strips carriage returns") {
  std::vector<std::string> lines;
  tsv::for_each_line("a\r\nb\n\nc", [&](std::size_t, std::string_view l) { lines.emplace_back(l); });
  CHECK(lines == std::vector<std::string>{"a", "b", "", "c"});
}

TEST_CASE("parallel_for visits each index once for any worker count") {
  for (unsigned threads : {1u, 2u, 3u, 8u}) {
    std::vector<int> hits(101, 0);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
  }
  CHECK_THROWS(parallel_for(10, 4, [](std::size_t i) {
    if (i == 7) throw Error(ErrorCode::InvalidArgument, "boom");
  }));
}

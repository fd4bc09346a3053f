#include <doctest.h>

#include <set>

#include "overtrade/ingest.hpp"
#include "test_support.hpp"

using namespace overtrade;
using namespace overtrade::ingest;
using testing::ymd;

namespace {

TradingCalendar jan_calendar() { return weekday_calendar(ymd(2024, 1, 2), 6); }

std::string posts_file(std::string_view body) { return std::string(kPostsHeader) + "\n" + std::string(body); }
std::string trades_file(std::string_view body) { return std::string(kTradesHeader) + "\n" + std::string(body); }

std::size_t count_reason(const std::vector<Rejection>& r, RejectReason reason) {
  return static_cast<std::size_t>(
      std::count_if(r.begin(), r.end(), [&](const Rejection& x) { return x.reason == reason; }));
}

}  // namespace

TEST_CASE("post rows land in their slot or are rejected with a reason") {
  auto content = posts_file(
      "600001.SH\t2024-01-02 09:45\tu1\t看好\n"
      "600001.SH\t2024-01-02 12:15\tu1\t看好\n"
      "600001.SH\t\tu1\t看好\n"
      "600001.SH\t2024-01-02 9h\tu1\t看好\n"
      "600001.SH\t2024-01-02 14:10:00\tu1\t  \n"
      "600001.SH\t2024-01-06 10:00\tu1\t看好\n"
      "600001.SH\t2024-01-02 10:00\tu1\n"
      "000002.SZ\t2024-01-03T15:00:00\tu2\t收盘\n");
  auto result = parse_posts(content, jan_calendar());
  CHECK(result.rows_read == 8);
  REQUIRE(result.rows.size() == 2);
  CHECK(result.rows[0].slot == Slot::S1);
  CHECK(result.rows[0].text == "看好");
  CHECK(result.rows[1].slot == Slot::S4);
  CHECK(result.rows.size() + result.rejections.size() == result.rows_read);
  CHECK(count_reason(result.rejections, RejectReason::OutsideTradingHours) == 1);
  CHECK(count_reason(result.rejections, RejectReason::MissingTimestamp) == 1);
  CHECK(count_reason(result.rejections, RejectReason::BadTimestamp) == 1);
  CHECK(count_reason(result.rejections, RejectReason::EmptyText) == 1);
  CHECK(count_reason(result.rejections, RejectReason::NonTradingDay) == 1);
  CHECK(count_reason(result.rejections, RejectReason::MalformedRow) == 1);
  for (const auto& r : result.rejections) CHECK(r.source == "posts");
}

TEST_CASE("a wrong header is a format error") {
  CHECK_THROWS_AS(parse_posts("stock\ttime\ttext\n", jan_calendar()), Error);
  testing::TempDir dir;
  CHECK_THROWS_AS(load_posts(dir / "absent.tsv", jan_calendar()), Error);
}

TEST_CASE("escaped post text survives a write and reload") {
  testing::TempDir dir;
  std::vector<Post> posts{{"600001.SH", *Timestamp::parse("2024-01-02 09:45"), Slot::S1, "u1",
                           "line\tone\nline\\two", 0}};
  write_posts(dir / "p.tsv", posts);
  auto back = load_posts(dir / "p.tsv", jan_calendar());
  REQUIRE(back.rows.size() == 1);
  CHECK(back.rows[0].text == posts[0].text);
  CHECK(back.rows[0].posted_at == posts[0].posted_at);
}

TEST_CASE("trade rows check price, volume and session") {
  auto content = trades_file(
      "600001.SH\t2024-01-02 09:35\t10.5\t1000\n"
      "600001.SH\t2024-01-02 15:00:00\t10.5\t1000\n"
      "600001.SH\t2024-01-02 09:35\t0\t1000\n"
      "600001.SH\t2024-01-02 09:35\t10\t0\n"
      "600001.SH\t2024-01-02 09:25\t10\t100\n"
      "600001.SH\t2024-01-02 09:35\tten\t100\n");
  auto result = parse_trades(content, jan_calendar());
  REQUIRE(result.rows.size() == 2);
  CHECK(result.rows[1].slot == Slot::S4);
  CHECK(count_reason(result.rejections, RejectReason::BadPrice) >= 1);
  CHECK(count_reason(result.rejections, RejectReason::BadVolume) == 1);
  CHECK(count_reason(result.rejections, RejectReason::OutsideTradingHours) == 1);
  CHECK(result.rows.size() + result.rejections.size() == result.rows_read);
}

TEST_CASE("shares, fundamentals and membership loaders") {
  testing::TempDir dir;
  auto shares = load_shares(testing::write_text(dir / "s.tsv",
      "stock_id\tdate\tshares\n"
      "A\t2024-01-01\t100\nA\t2023-01-01\t90\nB\t2024-01-01\t-1\nB\t2024-02-01\t50\n"));
  CHECK(shares.rows.size() == 2);
  CHECK(count_reason(shares.rejections, RejectReason::NonIncreasingDate) == 1);
  CHECK(count_reason(shares.rejections, RejectReason::BadShares) == 1);

  auto fundamentals = load_fundamentals(testing::write_text(dir / "f.tsv",
      std::string(kFundamentalsHeader) + "\n"
      "A\t2024-01-02\t1.2\t0.01\t0.02\t1e10\n"
      "A\t2024-01-02\t1.3\t0.01\t0.02\t1e10\n"
      "B\t2024-01-02\t1.2\t0.01\t0.02\t-5\n"
      "B\t2024-01-03\tx\t0.01\t0.02\t5\n"));
  CHECK(fundamentals.rows.size() == 1);
  CHECK(fundamentals.rejections.size() == 3);
  CHECK(count_reason(fundamentals.rejections, RejectReason::DuplicateKey) == 1);

  auto membership = load_membership(testing::write_text(dir / "m.tsv",
      "stock_id\tdate\nA\t2020-01-01\nA\tnope\n"));
  CHECK(membership.rows.size() == 1);
  CHECK(count_reason(membership.rejections, RejectReason::BadDate) == 1);
}

TEST_CASE("bot filter examples") {
  std::vector<Post> posts{{"A", {}, Slot::S1, "u1", "x", 1},
                          {"A", {}, Slot::S1, "AI Summary", "x", 2},
                          {"A", {}, Slot::S1, "u2", "x", 3},
                          {"B", {}, Slot::S1, "Ask-Sectary Robot", "x", 4}};
  auto kept = filter_bot_posts(posts, kDefaultBotIds);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].line == 1);
  CHECK(kept[1].line == 3);
  CHECK(filter_bot_posts(posts, {}).size() == 4);
  CHECK(filter_bot_posts(kept, kDefaultBotIds).size() == kept.size());
}

TEST_CASE("sparse filter: 10 percent empty is the edge") {
  const std::size_t total = 4860;
  std::map<std::string, std::size_t> occupied{
      {"full", total}, {"edge", total - 486}, {"over", total - 487}, {"empty", 0}};
  auto kept = filter_sparse_stocks(occupied, total, 0.10);
  CHECK(kept == std::set<std::string>{"edge", "full"});
  CHECK(filter_sparse_stocks({{"x", 10}}, 10, 0.0).size() == 1);
  CHECK_THROWS_AS(filter_sparse_stocks(occupied, 0, 0.1), Error);
}

TEST_CASE("occupied slots count distinct keys") {
  auto t = *Timestamp::parse("2024-01-02 09:45");
  std::vector<Post> posts{{"A", t, Slot::S1, "u", "x", 1},
                          {"A", t, Slot::S1, "u", "y", 2},
                          {"A", *Timestamp::parse("2024-01-02 10:45"), Slot::S2, "u", "z", 3}};
  CHECK(occupied_slot_counts(posts).at("A") == 2);
}

TEST_CASE("suspension filter: more than the limit removes") {
  auto cal = weekday_calendar(ymd(2020, 1, 1), 100);
  std::map<std::string, std::set<Date>> active;
  auto days_after = [&](std::size_t skip) {
    std::set<Date> s;
    for (std::size_t i = skip; i < cal.size(); ++i) s.insert(cal.days()[i]);
    return s;
  };
  active["none"] = days_after(0);
  active["thirty"] = days_after(30);
  active["thirtyone"] = days_after(31);
  active["silent"] = {};
  auto kept = filter_suspended_stocks(active, cal, 30);
  CHECK(kept == std::set<std::string>{"none", "thirty"});
}

TEST_CASE("index churn counts membership records") {
  std::vector<MembershipEvent> events{{"A", ymd(2020, 1, 1)}, {"A", ymd(2020, 2, 1)},
                                      {"B", ymd(2020, 1, 1)}, {"B", ymd(2020, 2, 1)},
                                      {"B", ymd(2020, 3, 1)}};
  CHECK(index_churn_stocks(events, 2) == std::set<std::string>{"B"});
  CHECK(index_churn_stocks(events, 3).empty());
}

TEST_CASE("stock filters are idempotent and commute") {
  std::vector<TradeTick> ticks;
  auto cal = weekday_calendar(ymd(2024, 1, 2), 10);
  for (int s = 0; s < 6; ++s) {
    for (std::size_t d = 0; d < cal.size(); d += static_cast<std::size_t>(s + 1)) {
      ticks.push_back({"S" + std::to_string(s), {cal.days()[d], hms(9, 40)}, Slot::S1, 10.0, 100});
    }
  }
  auto trading = filter_suspended_stocks(active_trading_days(ticks), cal, 4);
  auto once = keep_stocks(ticks, trading);
  auto twice = keep_stocks(once, filter_suspended_stocks(active_trading_days(once), cal, 4));
  CHECK(once.size() == twice.size());

  std::set<std::string> other{"S0", "S3", "S5"};
  auto ab = keep_stocks(keep_stocks(ticks, trading), other);
  auto ba = keep_stocks(keep_stocks(ticks, other), trading);
  REQUIRE(ab.size() == ba.size());
  for (std::size_t i = 0; i < ab.size(); ++i) CHECK(ab[i].stock_id == ba[i].stock_id);
}

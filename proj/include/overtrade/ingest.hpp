#pragma once

// Loading and cleaning of the raw forum-post and trade-tape inputs.

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "overtrade/common.hpp"

namespace overtrade::ingest {

struct Post {
  std::string stock_id;
  Timestamp posted_at;
  Slot slot = Slot::S1;
  std::string author_id;
  std::string text;
  std::size_t line = 0;
};

struct TradeTick {
  std::string stock_id;
  Timestamp traded_at;
  Slot slot = Slot::S1;
  double price = 0.0;
  std::int64_t volume = 0;
};

struct SharesOutstanding {
  std::string stock_id;
  Date effective_date;
  double shares = 0.0;
};

struct DailyFundamentals {
  std::string stock_id;
  Date date;
  double pb = 0.0;
  double market_risk_premium = 0.0;
  double market_return = 0.0;
  double float_cap = 0.0;
};

struct MembershipEvent {
  std::string stock_id;
  Date date;
};

enum class RejectReason {
  MalformedRow,
  MissingTimestamp,
  BadTimestamp,
  NonTradingDay,
  OutsideTradingHours,
  EmptyText,
  BadPrice,
  BadVolume,
  BadShares,
  BadDate,
  BadNumber,
  NonIncreasingDate,
  DuplicateKey,
};

std::string_view to_string(RejectReason reason);

struct Rejection {
  std::string source;  // posts, trades, shares, fundamentals, membership
  std::string stock_id;
  std::size_t line = 0;
  RejectReason reason = RejectReason::MalformedRow;
};

template <class Row>
struct LoadResult {
  std::vector<Row> rows;
  std::vector<Rejection> rejections;
  std::size_t rows_read = 0;  // data rows, header excluded
};

// Every loader requires the header line declared in the file-format docs and
// throws Error(Io) for an unreadable file or Error(Format) for a wrong header.
// Individual bad rows are rejected and logged, never fatal.
LoadResult<Post> load_posts(const std::filesystem::path& path, const TradingCalendar& calendar);
LoadResult<TradeTick> load_trades(const std::filesystem::path& path,
                                  const TradingCalendar& calendar);
LoadResult<SharesOutstanding> load_shares(const std::filesystem::path& path);
LoadResult<DailyFundamentals> load_fundamentals(const std::filesystem::path& path);
LoadResult<MembershipEvent> load_membership(const std::filesystem::path& path);

// Same parsing as the file loaders, over in-memory content.
LoadResult<Post> parse_posts(std::string_view content, const TradingCalendar& calendar,
                             std::string_view origin = "posts");
LoadResult<TradeTick> parse_trades(std::string_view content, const TradingCalendar& calendar,
                                   std::string_view origin = "trades");

inline constexpr std::string_view kPostsHeader = "stock_id\ttimestamp\tauthor_id\ttext";
inline constexpr std::string_view kTradesHeader = "stock_id\ttimestamp\tprice\tvolume";
inline constexpr std::string_view kSharesHeader = "stock_id\tdate\tshares";
inline constexpr std::string_view kFundamentalsHeader =
    "stock_id\tdate\tpb\tmarket_risk_premium\tmarket_return\tfloat_cap";
inline constexpr std::string_view kMembershipHeader = "stock_id\tdate";
inline constexpr std::string_view kRejectionsHeader = "source\tstock_id\tline\treason";

void write_posts(const std::filesystem::path& path, std::span<const Post> posts);
void write_trades(const std::filesystem::path& path, std::span<const TradeTick> ticks);
void write_rejections(const std::filesystem::path& path, std::span<const Rejection> rejections);

inline const std::set<std::string> kDefaultBotIds = {"Ask-Sectary Robot", "AI Summary"};

// Drops posts whose author is a known bot account; order preserved.
std::vector<Post> filter_bot_posts(std::vector<Post> posts, const std::set<std::string>& bot_ids);

// Number of distinct (date, slot) keys carrying at least one post, per stock.
std::map<std::string, std::size_t> occupied_slot_counts(std::span<const Post> posts);

// A stock survives iff empty_slots / total_slots <= max_empty_fraction.
std::set<std::string> filter_sparse_stocks(const std::map<std::string, std::size_t>& occupied_slots,
                                           std::size_t total_slots,
                                           double max_empty_fraction = 0.10);

// Trading days with at least one tick, per stock.
std::map<std::string, std::set<Date>> active_trading_days(std::span<const TradeTick> ticks);

// Each calendar day without ticks is a suspension day; a stock is removed iff
// its count exceeds max_suspension_days.
std::set<std::string> filter_suspended_stocks(const std::map<std::string, std::set<Date>>& active,
                                              const TradingCalendar& calendar,
                                              std::size_t max_suspension_days = 30);

// Stocks whose index-membership record count exceeds max_changes. Returned set
// is the stocks to REMOVE.
std::set<std::string> index_churn_stocks(std::span<const MembershipEvent> events,
                                         std::size_t max_changes = 2);

template <class Row>
std::vector<Row> keep_stocks(std::vector<Row> rows, const std::set<std::string>& keep) {
  std::erase_if(rows, [&](const Row& r) { return !keep.contains(r.stock_id); });
  return rows;
}

}  // namespace overtrade::ingest

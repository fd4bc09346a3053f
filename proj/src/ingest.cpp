#include "overtrade/ingest.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

namespace overtrade::ingest {

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::MalformedRow: return "malformed-row";
    case RejectReason::MissingTimestamp: return "missing-timestamp";
    case RejectReason::BadTimestamp: return "bad-timestamp";
    case RejectReason::NonTradingDay: return "non-trading-day";
    case RejectReason::OutsideTradingHours: return "outside-trading-hours";
    case RejectReason::EmptyText: return "empty-text";
    case RejectReason::BadPrice: return "bad-price";
    case RejectReason::BadVolume: return "bad-volume";
    case RejectReason::BadShares: return "bad-shares";
    case RejectReason::BadDate: return "bad-date";
    case RejectReason::BadNumber: return "bad-number";
    case RejectReason::NonIncreasingDate: return "non-increasing-date";
    case RejectReason::DuplicateKey: return "duplicate-key";
  }
  return "unknown";
}

namespace {

// Calls row_fn(line_no, fields) for each data line after validating the header.
template <class Fn>
std::size_t for_each_record(std::string_view content, std::string_view header,
                            std::string_view origin, Fn&& row_fn) {
  bool seen_header = false;
  std::size_t rows = 0;
  tsv::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (!seen_header) {
      if (tsv::trim(line).empty()) return;
      if (line != header) {
        throw Error(ErrorCode::Format,
                    fmt::format("{}: expected header '{}'", origin, tsv::escape(header)));
      }
      seen_header = true;
      return;
    }
    if (line.empty()) return;
    ++rows;
    row_fn(line_no, tsv::split(line));
  });
  if (!seen_header) {
    throw Error(ErrorCode::Format, fmt::format("{}: missing header", origin));
  }
  return rows;
}

struct SlottedTime {
  Timestamp ts;
  Slot slot;
};

// Shared timestamp validation for posts and trades.
std::optional<SlottedTime> check_time(std::string_view field, const TradingCalendar& calendar,
                                      RejectReason& reason) {
  field = tsv::trim(field);
  if (field.empty()) {
    reason = RejectReason::MissingTimestamp;
    return std::nullopt;
  }
  auto ts = Timestamp::parse(field);
  if (!ts) {
    reason = RejectReason::BadTimestamp;
    return std::nullopt;
  }
  if (!calendar.contains(ts->date)) {
    reason = RejectReason::NonTradingDay;
    return std::nullopt;
  }
  auto slot = assign_slot(*ts);
  if (!slot) {
    reason = RejectReason::OutsideTradingHours;
    return std::nullopt;
  }
  return SlottedTime{*ts, *slot};
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

// Formats a timestamp the way Timestamp::to_string does, without allocating.
void append_timestamp(fmt::memory_buffer& buf, const Timestamp& ts) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{std::chrono::days{ts.date.days}}};
  fmt::format_to(std::back_inserter(buf), "{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}",
                 static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                 static_cast<unsigned>(ymd.day()), ts.seconds / 3600, (ts.seconds / 60) % 60,
                 ts.seconds % 60);
}

}  // namespace

LoadResult<Post> parse_posts(std::string_view content, const TradingCalendar& calendar,
                             std::string_view origin) {
  LoadResult<Post> result;
  auto reject = [&](std::string_view stock, std::size_t line, RejectReason why) {
    result.rejections.push_back({"posts", std::string(stock), line, why});
  };
  result.rows_read = for_each_record(
      content, kPostsHeader, origin,
      [&](std::size_t line_no, const std::vector<std::string_view>& f) {
        if (f.size() != 4 || tsv::trim(f[0]).empty()) {
          reject(f.empty() ? std::string_view{} : f[0], line_no, RejectReason::MalformedRow);
          return;
        }
        RejectReason why{};
        auto when = check_time(f[1], calendar, why);
        if (!when) {
          reject(f[0], line_no, why);
          return;
        }
        std::string text = tsv::unescape(f[3]);
        if (tsv::trim(text).empty()) {
          reject(f[0], line_no, RejectReason::EmptyText);
          return;
        }
        result.rows.push_back(Post{std::string(tsv::trim(f[0])), when->ts, when->slot,
                                   std::string(f[2]), std::move(text), line_no});
      });
  return result;
}

LoadResult<Post> load_posts(const std::filesystem::path& path, const TradingCalendar& calendar) {
  return parse_posts(tsv::read_file(path), calendar, path.string());
}

LoadResult<TradeTick> parse_trades(std::string_view content, const TradingCalendar& calendar,
                                   std::string_view origin) {
  LoadResult<TradeTick> result;
  auto reject = [&](std::string_view stock, std::size_t line, RejectReason why) {
    result.rejections.push_back({"trades", std::string(stock), line, why});
  };
  result.rows_read = for_each_record(
      content, kTradesHeader, origin,
      [&](std::size_t line_no, const std::vector<std::string_view>& f) {
        if (f.size() != 4 || tsv::trim(f[0]).empty()) {
          reject(f.empty() ? std::string_view{} : f[0], line_no, RejectReason::MalformedRow);
          return;
        }
        RejectReason why{};
        auto when = check_time(f[1], calendar, why);
        if (!when) {
          reject(f[0], line_no, why);
          return;
        }
        auto price = tsv::parse_double(f[2]);
        if (!price || !(*price > 0.0) || !std::isfinite(*price)) {
          reject(f[0], line_no, RejectReason::BadPrice);
          return;
        }
        auto volume = tsv::parse_int(f[3]);
        if (!volume || *volume <= 0) {
          reject(f[0], line_no, RejectReason::BadVolume);
          return;
        }
        result.rows.push_back(
            TradeTick{std::string(tsv::trim(f[0])), when->ts, when->slot, *price, *volume});
      });
  return result;
}

LoadResult<TradeTick> load_trades(const std::filesystem::path& path,
                                  const TradingCalendar& calendar) {
  return parse_trades(tsv::read_file(path), calendar, path.string());
}

LoadResult<SharesOutstanding> load_shares(const std::filesystem::path& path) {
  LoadResult<SharesOutstanding> result;
  std::map<std::string, Date, std::less<>> last_date;
  const auto content = tsv::read_file(path);
  result.rows_read = for_each_record(
      content, kSharesHeader, path.string(),
      [&](std::size_t line_no, const std::vector<std::string_view>& f) {
        auto reject = [&](RejectReason why) {
          result.rejections.push_back(
              {"shares", f.empty() ? std::string{} : std::string(f[0]), line_no, why});
        };
        if (f.size() != 3 || tsv::trim(f[0]).empty()) return reject(RejectReason::MalformedRow);
        auto date = Date::parse(tsv::trim(f[1]));
        if (!date) return reject(RejectReason::BadDate);
        auto shares = tsv::parse_double(f[2]);
        if (!shares || !(*shares > 0.0) || !std::isfinite(*shares)) {
          return reject(RejectReason::BadShares);
        }
        std::string stock(tsv::trim(f[0]));
        auto it = last_date.find(stock);
        if (it != last_date.end() && !(it->second < *date)) {
          return reject(RejectReason::NonIncreasingDate);
        }
        last_date[stock] = *date;
        result.rows.push_back({std::move(stock), *date, *shares});
      });
  return result;
}

LoadResult<DailyFundamentals> load_fundamentals(const std::filesystem::path& path) {
  LoadResult<DailyFundamentals> result;
  std::set<std::pair<std::string, Date>> seen;
  const auto content = tsv::read_file(path);
  result.rows_read = for_each_record(
      content, kFundamentalsHeader, path.string(),
      [&](std::size_t line_no, const std::vector<std::string_view>& f) {
        auto reject = [&](RejectReason why) {
          result.rejections.push_back(
              {"fundamentals", f.empty() ? std::string{} : std::string(f[0]), line_no, why});
        };
        if (f.size() != 6 || tsv::trim(f[0]).empty()) return reject(RejectReason::MalformedRow);
        auto date = Date::parse(tsv::trim(f[1]));
        if (!date) return reject(RejectReason::BadDate);
        std::array<double, 4> values{};
        for (std::size_t i = 0; i < 4; ++i) {
          auto v = tsv::parse_double(f[2 + i]);
          if (!v || !std::isfinite(*v)) return reject(RejectReason::BadNumber);
          values[i] = *v;
        }
        if (values[3] < 0.0) return reject(RejectReason::BadNumber);
        std::string stock(tsv::trim(f[0]));
        if (!seen.emplace(stock, *date).second) return reject(RejectReason::DuplicateKey);
        result.rows.push_back(
            {std::move(stock), *date, values[0], values[1], values[2], values[3]});
      });
  return result;
}

LoadResult<MembershipEvent> load_membership(const std::filesystem::path& path) {
  LoadResult<MembershipEvent> result;
  const auto content = tsv::read_file(path);
  result.rows_read = for_each_record(
      content, kMembershipHeader, path.string(),
      [&](std::size_t line_no, const std::vector<std::string_view>& f) {
        if (f.size() != 2 || tsv::trim(f[0]).empty()) {
          result.rejections.push_back({"membership", f.empty() ? "" : std::string(f[0]),
                                       line_no, RejectReason::MalformedRow});
          return;
        }
        auto date = Date::parse(tsv::trim(f[1]));
        if (!date) {
          result.rejections.push_back(
              {"membership", std::string(f[0]), line_no, RejectReason::BadDate});
          return;
        }
        result.rows.push_back({std::string(tsv::trim(f[0])), *date});
      });
  return result;
}

void write_posts(const std::filesystem::path& path, std::span<const Post> posts) {
  auto out = open_out(path);
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "{}\n", kPostsHeader);
  for (const auto& p : posts) {
    fmt::format_to(std::back_inserter(buf), "{}\t", p.stock_id);
    append_timestamp(buf, p.posted_at);
    fmt::format_to(std::back_inserter(buf), "\t{}\t{}\n", p.author_id, tsv::escape(p.text));
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_trades(const std::filesystem::path& path, std::span<const TradeTick> ticks) {
  auto out = open_out(path);
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "{}\n", kTradesHeader);
  for (const auto& t : ticks) {
    fmt::format_to(std::back_inserter(buf), "{}\t", t.stock_id);
    append_timestamp(buf, t.traded_at);
    fmt::format_to(std::back_inserter(buf), "\t{}\t{}\n", t.price, t.volume);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_rejections(const std::filesystem::path& path, std::span<const Rejection> rejections) {
  auto out = open_out(path);
  out << kRejectionsHeader << '\n';
  for (const auto& r : rejections) {
    out << r.source << '\t' << r.stock_id << '\t' << r.line << '\t' << to_string(r.reason)
        << '\n';
  }
}

std::vector<Post> filter_bot_posts(std::vector<Post> posts, const std::set<std::string>& bot_ids) {
  if (bot_ids.empty()) return posts;
  std::erase_if(posts, [&](const Post& p) { return bot_ids.contains(p.author_id); });
  return posts;
}

std::map<std::string, std::size_t> occupied_slot_counts(std::span<const Post> posts) {
  std::map<std::string, std::set<SlotKey>> occupied;
  for (const auto& p : posts) occupied[p.stock_id].insert(SlotKey{p.posted_at.date, p.slot});
  std::map<std::string, std::size_t> counts;
  for (const auto& [stock, keys] : occupied) counts.emplace(stock, keys.size());
  return counts;
}

std::set<std::string> filter_sparse_stocks(const std::map<std::string, std::size_t>& occupied_slots,
                                           std::size_t total_slots, double max_empty_fraction) {
  if (total_slots == 0) throw Error(ErrorCode::EmptySample, "sample has no hour slots");
  std::set<std::string> survivors;
  for (const auto& [stock, occupied] : occupied_slots) {
    const std::size_t empty = occupied >= total_slots ? 0 : total_slots - occupied;
    const double fraction = static_cast<double>(empty) / static_cast<double>(total_slots);
    if (fraction <= max_empty_fraction) survivors.insert(stock);
  }
  return survivors;
}

std::map<std::string, std::set<Date>> active_trading_days(std::span<const TradeTick> ticks) {
  std::map<std::string, std::set<Date>> active;
  for (const auto& t : ticks) active[t.stock_id].insert(t.traded_at.date);
  return active;
}

std::set<std::string> filter_suspended_stocks(const std::map<std::string, std::set<Date>>& active,
                                              const TradingCalendar& calendar,
                                              std::size_t max_suspension_days) {
  std::set<std::string> survivors;
  for (const auto& [stock, days] : active) {
    std::size_t traded = 0;
    for (const auto& d : days) traded += calendar.contains(d) ? 1 : 0;
    const std::size_t suspended = calendar.size() - traded;
    if (suspended <= max_suspension_days) survivors.insert(stock);
  }
  return survivors;
}

std::set<std::string> index_churn_stocks(std::span<const MembershipEvent> events,
                                         std::size_t max_changes) {
  std::map<std::string, std::size_t> counts;
  for (const auto& e : events) ++counts[e.stock_id];
  std::set<std::string> removed;
  for (const auto& [stock, n] : counts) {
    if (n > max_changes) removed.insert(stock);
  }
  return removed;
}

}  // namespace overtrade::ingest

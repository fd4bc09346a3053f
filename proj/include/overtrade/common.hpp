#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace overtrade {

enum class ErrorCode {
  Io,
  Format,
  Config,
  EmptySample,
  EmptyLexicon,
  MissingShares,
  InsufficientHistory,
  Undated,
  NegativeCap,
  DataIntegrity,
  Collinear,
  Underdetermined,
  DegenerateAuxiliary,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 protected:
  struct Verbatim {};
  Error(ErrorCode code, const std::string& what, Verbatim) : std::runtime_error(what), code_(code) {}

 private:
  ErrorCode code_;
};

// Calendar date stored as days since 1970-01-01.
struct Date {
  std::int32_t days = 0;

  static Date from_ymd(int year, unsigned month, unsigned day);
  static std::optional<Date> parse(std::string_view text);  // YYYY-MM-DD
  std::string to_string() const;
  int weekday() const;  // 0 = Sunday
  Date next() const { return Date{days + 1}; }

  auto operator<=>(const Date&) const = default;
};

struct Timestamp {
  Date date;
  std::int32_t seconds = 0;  // since local midnight

  // Accepts "YYYY-MM-DD[T ]HH:MM" or "YYYY-MM-DD[T ]HH:MM:SS".
  static std::optional<Timestamp> parse(std::string_view text);
  std::string to_string() const;

  auto operator<=>(const Timestamp&) const = default;
};

constexpr std::int32_t hms(int h, int m, int s = 0) { return h * 3600 + m * 60 + s; }

enum class Slot : std::uint8_t { S1 = 1, S2 = 2, S3 = 3, S4 = 4 };

inline constexpr Slot kAllSlots[] = {Slot::S1, Slot::S2, Slot::S3, Slot::S4};

constexpr int slot_index(Slot s) { return static_cast<int>(s); }
std::string_view to_string(Slot s);
std::optional<Slot> parse_slot(std::string_view text);

// Intraday buckets: [09:30,10:30) [10:30,11:30) [13:00,14:00) [14:00,15:00].
std::optional<Slot> assign_slot(std::int32_t seconds_of_day);
inline std::optional<Slot> assign_slot(const Timestamp& ts) { return assign_slot(ts.seconds); }
std::int32_t slot_start(Slot s);
std::int32_t slot_end(Slot s);

struct SlotKey {
  Date date;
  Slot slot = Slot::S1;
  auto operator<=>(const SlotKey&) const = default;
};

class TradingCalendar {
 public:
  TradingCalendar() = default;
  explicit TradingCalendar(std::vector<Date> days);

  const std::vector<Date>& days() const { return days_; }
  std::size_t size() const { return days_.size(); }
  bool empty() const { return days_.empty(); }
  bool contains(Date d) const;
  std::optional<std::size_t> index_of(Date d) const;

 private:
  std::vector<Date> days_;
};

TradingCalendar load_calendar(const std::filesystem::path& path);
void write_calendar(const std::filesystem::path& path, const TradingCalendar& calendar);

// Weekdays starting at `first` (inclusive), `count` of them.
TradingCalendar weekday_calendar(Date first, std::size_t count);

namespace tsv {

std::vector<std::string_view> split(std::string_view line, char sep = '\t');
std::string_view trim(std::string_view s);

std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);

// Backslash escapes used by the posts file: \t \n \r \\.
std::string unescape(std::string_view s);
std::string escape(std::string_view s);

// Reads the whole file; throws Error(Io) when unreadable.
std::string read_file(const std::filesystem::path& path);

// Iterates lines (without terminator, trailing '\r' removed) with 1-based line numbers.
void for_each_line(std::string_view content,
                   const std::function<void(std::size_t, std::string_view)>& fn);

// Shortest round-trip representation.
std::string full(double v);
std::string fixed6(double v);
std::string opt_full(const std::optional<double>& v);
inline constexpr std::string_view kNA = "NA";

}  // namespace tsv

// Runs fn(i) for i in [0, n) on up to `threads` workers. Work assignment is
// static so callers can write to pre-sized outputs without synchronization.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace overtrade

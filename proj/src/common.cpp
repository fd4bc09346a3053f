#include "overtrade/common.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>

namespace overtrade {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "io";
    case ErrorCode::Format: return "format";
    case ErrorCode::Config: return "config";
    case ErrorCode::EmptySample: return "empty-sample";
    case ErrorCode::EmptyLexicon: return "empty-lexicon";
    case ErrorCode::MissingShares: return "missing-shares";
    case ErrorCode::InsufficientHistory: return "insufficient-history";
    case ErrorCode::Undated: return "undated";
    case ErrorCode::NegativeCap: return "negative-cap";
    case ErrorCode::DataIntegrity: return "data-integrity";
    case ErrorCode::Collinear: return "collinear";
    case ErrorCode::Underdetermined: return "underdetermined";
    case ErrorCode::DegenerateAuxiliary: return "degenerate-auxiliary";
    case ErrorCode::InvalidArgument: return "invalid-argument";
  }
  return "unknown";
}

// ---------------------------------------------------------------- dates

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  using namespace std::chrono;
  const sys_days sd{year_month_day{std::chrono::year{year}, std::chrono::month{month},
                                   std::chrono::day{day}}};
  return Date{static_cast<std::int32_t>(sd.time_since_epoch().count())};
}

namespace {

bool parse_fixed_digits(std::string_view s, int& out) {
  if (s.empty()) return false;
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

}  // namespace

std::optional<Date> Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_fixed_digits(text.substr(0, 4), y) || !parse_fixed_digits(text.substr(5, 2), m) ||
      !parse_fixed_digits(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return from_ymd(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

std::string Date::to_string() const {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

int Date::weekday() const {
  using namespace std::chrono;
  return static_cast<int>(std::chrono::weekday{sys_days{std::chrono::days{days}}}.c_encoding());
}

std::optional<Timestamp> Timestamp::parse(std::string_view text) {
  if (text.size() < 16) return std::nullopt;
  auto date = Date::parse(text.substr(0, 10));
  if (!date) return std::nullopt;
  if (text[10] != 'T' && text[10] != ' ') return std::nullopt;
  auto rest = text.substr(11);
  if (rest.size() != 5 && rest.size() != 8) return std::nullopt;
  if (rest[2] != ':') return std::nullopt;
  int h = 0, m = 0, s = 0;
  if (!parse_fixed_digits(rest.substr(0, 2), h) || !parse_fixed_digits(rest.substr(3, 2), m)) {
    return std::nullopt;
  }
  if (rest.size() == 8) {
    if (rest[5] != ':' || !parse_fixed_digits(rest.substr(6, 2), s)) return std::nullopt;
  }
  if (h > 23 || m > 59 || s > 59) return std::nullopt;
  return Timestamp{*date, hms(h, m, s)};
}

std::string Timestamp::to_string() const {
  return fmt::format("{}T{:02d}:{:02d}:{:02d}", date.to_string(), seconds / 3600,
                     (seconds / 60) % 60, seconds % 60);
}

// ---------------------------------------------------------------- slots

std::string_view to_string(Slot s) {
  switch (s) {
    case Slot::S1: return "S1";
    case Slot::S2: return "S2";
    case Slot::S3: return "S3";
    case Slot::S4: return "S4";
  }
  return "S?";
}

std::optional<Slot> parse_slot(std::string_view text) {
  if (text == "S1") return Slot::S1;
  if (text == "S2") return Slot::S2;
  if (text == "S3") return Slot::S3;
  if (text == "S4") return Slot::S4;
  return std::nullopt;
}

std::int32_t slot_start(Slot s) {
  switch (s) {
    case Slot::S1: return hms(9, 30);
    case Slot::S2: return hms(10, 30);
    case Slot::S3: return hms(13, 0);
    case Slot::S4: return hms(14, 0);
  }
  return 0;
}

std::int32_t slot_end(Slot s) {
  switch (s) {
    case Slot::S1: return hms(10, 30);
    case Slot::S2: return hms(11, 30);
    case Slot::S3: return hms(14, 0);
    case Slot::S4: return hms(15, 0);
  }
  return 0;
}

std::optional<Slot> assign_slot(std::int32_t t) {
  if (t >= hms(9, 30) && t < hms(10, 30)) return Slot::S1;
  if (t >= hms(10, 30) && t < hms(11, 30)) return Slot::S2;
  if (t >= hms(13, 0) && t < hms(14, 0)) return Slot::S3;
  // closing print at exactly 15:00:00 belongs to S4
  if (t >= hms(14, 0) && t <= hms(15, 0)) return Slot::S4;
  return std::nullopt;
}

// ---------------------------------------------------------------- calendar

TradingCalendar::TradingCalendar(std::vector<Date> days) : days_(std::move(days)) {
  std::sort(days_.begin(), days_.end());
  days_.erase(std::unique(days_.begin(), days_.end()), days_.end());
}

bool TradingCalendar::contains(Date d) const {
  return std::binary_search(days_.begin(), days_.end(), d);
}

std::optional<std::size_t> TradingCalendar::index_of(Date d) const {
  auto it = std::lower_bound(days_.begin(), days_.end(), d);
  if (it == days_.end() || *it != d) return std::nullopt;
  return static_cast<std::size_t>(it - days_.begin());
}

TradingCalendar load_calendar(const std::filesystem::path& path) {
  const auto content = tsv::read_file(path);
  std::vector<Date> days;
  tsv::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    auto field = tsv::trim(line);
    if (field.empty() || field.front() == '#') return;
    if (line_no == 1 && field == "date") return;
    auto d = Date::parse(field);
    if (!d) {
      throw Error(ErrorCode::Format,
                  fmt::format("{}:{}: bad calendar date '{}'", path.string(), line_no, field));
    }
    days.push_back(*d);
  });
  if (days.empty()) throw Error(ErrorCode::EmptySample, "calendar " + path.string() + " is empty");
  return TradingCalendar(std::move(days));
}

void write_calendar(const std::filesystem::path& path, const TradingCalendar& calendar) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "date\n";
  for (const auto& d : calendar.days()) out << d.to_string() << '\n';
}

TradingCalendar weekday_calendar(Date first, std::size_t count) {
  std::vector<Date> days;
  days.reserve(count);
  for (Date d = first; days.size() < count; d = d.next()) {
    const int wd = d.weekday();
    if (wd != 0 && wd != 6) days.push_back(d);
  }
  return TradingCalendar(std::move(days));
}

// ---------------------------------------------------------------- tsv

namespace tsv {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      switch (s[i + 1]) {
        case 't': out.push_back('\t'); ++i; continue;
        case 'n': out.push_back('\n'); ++i; continue;
        case 'r': out.push_back('\r'); ++i; continue;
        case '\\': out.push_back('\\'); ++i; continue;
        default: break;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void for_each_line(std::string_view content,
                   const std::function<void(std::size_t, std::string_view)>& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    auto line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(++line_no, line);
    start = end + 1;
  }
}

std::string full(double v) { return fmt::format("{}", v); }
std::string fixed6(double v) { return fmt::format("{:.6f}", v); }
std::string opt_full(const std::optional<double>& v) {
  return v ? full(*v) : std::string(kNA);
}

}  // namespace tsv

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace overtrade

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "overtrade/common.hpp"
#include "overtrade/ingest.hpp"

namespace overtrade::microstructure {

enum class InvestorClass { Institutional, Retail };
std::string_view to_string(InvestorClass c);

// A trade is institutional when its amount or its share count strictly exceeds
// the threshold.
struct ClassThresholds {
  double amount = 200'000.0;
  double shares = 100'000.0;
};

InvestorClass classify_trade(double price, std::int64_t volume, const ClassThresholds& thresholds);
inline InvestorClass classify_trade(const ingest::TradeTick& tick,
                                    const ClassThresholds& thresholds) {
  return classify_trade(tick.price, tick.volume, thresholds);
}

enum class TurnoverMeasure {
  ValueOverShares,   // sum(price * volume) / shares outstanding
  VolumeOverShares,  // sum(volume) / shares outstanding
};
std::optional<TurnoverMeasure> parse_turnover_measure(std::string_view text);
std::string_view to_string(TurnoverMeasure m);

struct SlotTurnover {
  double institutional = 0.0;
  double retail = 0.0;
  double total = 0.0;  // always institutional + retail
};

// Throws Error(MissingShares) when shares_outstanding is absent or not positive.
SlotTurnover slot_turnover(std::span<const ingest::TradeTick> ticks,
                           std::optional<double> shares_outstanding,
                           const ClassThresholds& thresholds,
                           TurnoverMeasure measure = TurnoverMeasure::ValueOverShares);

struct BaselineWindow {
  int window = 20;      // M
  int min_window = 10;  // fewer usable history values -> no baseline
};
inline int default_min_window(int window) { return (window + 1) / 2; }

struct ExcessTurnover {
  double value = 0.0;
  double baseline_mean = 0.0;
  int window_used = 0;
};

// `history` is ordered most recent first. nullopt when the baseline is
// unavailable (too little history, or a zero baseline).
std::optional<ExcessTurnover> excess_turnover(double current, std::span<const double> history,
                                              const BaselineWindow& window);

class SharesTable {
 public:
  SharesTable() = default;
  explicit SharesTable(std::span<const ingest::SharesOutstanding> rows);

  // Latest count effective on or before `date`.
  std::optional<double> at(std::string_view stock, Date date) const;

 private:
  std::map<std::string, std::vector<std::pair<Date, double>>, std::less<>> by_stock_;
};

enum class BaselineMode {
  SameSlot,  // same slot of day over the previous trading days
  Rolling,   // the immediately preceding slots, across slot boundaries
};
std::optional<BaselineMode> parse_baseline_mode(std::string_view text);
std::string_view to_string(BaselineMode m);

struct MetricsConfig {
  ClassThresholds thresholds{};
  ClassThresholds alt_thresholds{500'000.0, 100'000.0};
  TurnoverMeasure measure = TurnoverMeasure::ValueOverShares;
  bool cumulative = false;  // T_h accumulates slots 1..h of the same day
  BaselineMode baseline = BaselineMode::SameSlot;
  BaselineWindow window{};
};

struct SlotMetrics {
  std::string stock_id;
  SlotKey slot;
  SlotTurnover turnover;
  SlotTurnover alt_turnover;  // split under alt_thresholds
  std::optional<ExcessTurnover> et_total;
  std::optional<ExcessTurnover> et_inst;
  std::optional<ExcessTurnover> et_retail;
  std::optional<ExcessTurnover> et_inst_alt;
  std::optional<ExcessTurnover> et_retail_alt;
};

// Every (calendar day, slot) of one stock in chronological order. Ticks may be
// in any order; those outside the calendar are ignored.
std::vector<SlotMetrics> stock_metrics(std::string_view stock,
                                       std::span<const ingest::TradeTick> ticks,
                                       const TradingCalendar& calendar, const SharesTable& shares,
                                       const MetricsConfig& config);

// All listed stocks, sorted by (stock, date, slot); independent of `threads`.
std::vector<SlotMetrics> compute_metrics(std::span<const ingest::TradeTick> ticks,
                                         const std::set<std::string>& stocks,
                                         const TradingCalendar& calendar,
                                         const SharesTable& shares, const MetricsConfig& config,
                                         unsigned threads = 1);

inline constexpr std::string_view kMetricsHeader =
    "stock_id\tdate\tslot\tturnover_total\tturnover_inst\tturnover_retail\tet_total\tet_inst\t"
    "et_retail\twindow_used\tturnover_inst_alt\tturnover_retail_alt\tet_inst_alt\tet_retail_alt";
void write_metrics(const std::filesystem::path& path, std::span<const SlotMetrics> metrics);
std::vector<SlotMetrics> read_metrics(const std::filesystem::path& path);

}  // namespace overtrade::microstructure

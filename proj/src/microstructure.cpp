#include "overtrade/microstructure.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include <fmt/format.h>

namespace overtrade::microstructure {

std::string_view to_string(InvestorClass c) {
  return c == InvestorClass::Institutional ? "institutional" : "retail";
}

InvestorClass classify_trade(double price, std::int64_t volume,
                             const ClassThresholds& thresholds) {
  const double amount = price * static_cast<double>(volume);
  if (amount > thresholds.amount || static_cast<double>(volume) > thresholds.shares) {
    return InvestorClass::Institutional;
  }
  return InvestorClass::Retail;
}

std::optional<TurnoverMeasure> parse_turnover_measure(std::string_view text) {
  if (text == "value") return TurnoverMeasure::ValueOverShares;
  if (text == "volume") return TurnoverMeasure::VolumeOverShares;
  return std::nullopt;
}

std::string_view to_string(TurnoverMeasure m) {
  return m == TurnoverMeasure::ValueOverShares ? "value" : "volume";
}

std::optional<BaselineMode> parse_baseline_mode(std::string_view text) {
  if (text == "same_slot") return BaselineMode::SameSlot;
  if (text == "rolling") return BaselineMode::Rolling;
  return std::nullopt;
}

std::string_view to_string(BaselineMode m) {
  return m == BaselineMode::SameSlot ? "same_slot" : "rolling";
}

SlotTurnover slot_turnover(std::span<const ingest::TradeTick> ticks,
                           std::optional<double> shares_outstanding,
                           const ClassThresholds& thresholds, TurnoverMeasure measure) {
  if (!shares_outstanding || !(*shares_outstanding > 0.0)) {
    throw Error(ErrorCode::MissingShares, "no shares outstanding for slot");
  }
  double inst = 0.0;
  double retail = 0.0;
  for (const auto& t : ticks) {
    const double traded = measure == TurnoverMeasure::ValueOverShares
                              ? t.price * static_cast<double>(t.volume)
                              : static_cast<double>(t.volume);
    if (classify_trade(t, thresholds) == InvestorClass::Institutional) inst += traded;
    else retail += traded;
  }
  SlotTurnover out;
  out.institutional = inst / *shares_outstanding;
  out.retail = retail / *shares_outstanding;
  out.total = out.institutional + out.retail;
  return out;
}

std::optional<ExcessTurnover> excess_turnover(double current, std::span<const double> history,
                                              const BaselineWindow& window) {
  if (window.window < 1) throw Error(ErrorCode::Config, "baseline window M must be >= 1");
  const auto used = std::min<std::size_t>(history.size(), static_cast<std::size_t>(window.window));
  if (used == 0 || used < static_cast<std::size_t>(std::max(window.min_window, 0))) {
    return std::nullopt;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < used; ++i) sum += history[i];
  const double baseline = sum / static_cast<double>(used);
  if (!(baseline > 0.0)) return std::nullopt;
  return ExcessTurnover{(current - baseline) / baseline, baseline, static_cast<int>(used)};
}

SharesTable::SharesTable(std::span<const ingest::SharesOutstanding> rows) {
  for (const auto& r : rows) by_stock_[r.stock_id].emplace_back(r.effective_date, r.shares);
  for (auto& [_, v] : by_stock_) std::sort(v.begin(), v.end());
}

std::optional<double> SharesTable::at(std::string_view stock, Date date) const {
  auto it = by_stock_.find(stock);
  if (it == by_stock_.end()) return std::nullopt;
  const auto& v = it->second;
  auto pos = std::upper_bound(v.begin(), v.end(), date,
                              [](Date d, const std::pair<Date, double>& e) { return d < e.first; });
  if (pos == v.begin()) return std::nullopt;
  return std::prev(pos)->second;
}

namespace {

// Turnover series of one component, with history lookup per baseline mode.
class Series {
 public:
  Series(BaselineMode mode, BaselineWindow window) : mode_(mode), window_(window) {}

  std::optional<ExcessTurnover> push(std::size_t slot_pos, double value) {
    auto& hist = mode_ == BaselineMode::SameSlot ? per_slot_[slot_pos] : rolling_;
    scratch_.clear();
    const std::size_t take = std::min<std::size_t>(hist.size(), window_.window);
    for (std::size_t i = 0; i < take; ++i) scratch_.push_back(hist[hist.size() - 1 - i]);
    auto et = excess_turnover(value, scratch_, window_);
    hist.push_back(value);
    return et;
  }

 private:
  BaselineMode mode_;
  BaselineWindow window_;
  std::array<std::vector<double>, 4> per_slot_;
  std::vector<double> rolling_;
  std::vector<double> scratch_;
};

}  // namespace

std::vector<SlotMetrics> stock_metrics(std::string_view stock,
                                       std::span<const ingest::TradeTick> ticks,
                                       const TradingCalendar& calendar, const SharesTable& shares,
                                       const MetricsConfig& config) {
  // Bucket ticks by (day index, slot).
  std::vector<std::array<std::vector<ingest::TradeTick>, 4>> buckets(calendar.size());
  for (const auto& t : ticks) {
    auto day = calendar.index_of(t.traded_at.date);
    auto slot = assign_slot(t.traded_at);
    if (!day || !slot) continue;
    buckets[*day][slot_index(*slot) - 1].push_back(t);
  }

  Series total(config.baseline, config.window), inst(config.baseline, config.window),
      retail(config.baseline, config.window), inst_alt(config.baseline, config.window),
      retail_alt(config.baseline, config.window);

  std::vector<SlotMetrics> out;
  out.reserve(calendar.size() * 4);
  for (std::size_t d = 0; d < calendar.size(); ++d) {
    const Date date = calendar.days()[d];
    const auto c = shares.at(stock, date);
    if (!c) {
      throw Error(ErrorCode::MissingShares,
                  fmt::format("no shares outstanding for {} on {}", stock, date.to_string()));
    }
    SlotTurnover run{}, run_alt{};
    for (std::size_t s = 0; s < 4; ++s) {
      auto t = slot_turnover(buckets[d][s], c, config.thresholds, config.measure);
      auto t_alt = slot_turnover(buckets[d][s], c, config.alt_thresholds, config.measure);
      if (config.cumulative) {
        run.institutional += t.institutional;
        run.retail += t.retail;
        run.total = run.institutional + run.retail;
        run_alt.institutional += t_alt.institutional;
        run_alt.retail += t_alt.retail;
        run_alt.total = run_alt.institutional + run_alt.retail;
        t = run;
        t_alt = run_alt;
      }
      SlotMetrics m;
      m.stock_id = std::string(stock);
      m.slot = SlotKey{date, kAllSlots[s]};
      m.turnover = t;
      m.alt_turnover = t_alt;
      m.et_total = total.push(s, t.total);
      m.et_inst = inst.push(s, t.institutional);
      m.et_retail = retail.push(s, t.retail);
      m.et_inst_alt = inst_alt.push(s, t_alt.institutional);
      m.et_retail_alt = retail_alt.push(s, t_alt.retail);
      out.push_back(std::move(m));
    }
  }
  return out;
}

std::vector<SlotMetrics> compute_metrics(std::span<const ingest::TradeTick> ticks,
                                         const std::set<std::string>& stocks,
                                         const TradingCalendar& calendar,
                                         const SharesTable& shares, const MetricsConfig& config,
                                         unsigned threads) {
  std::map<std::string_view, std::vector<ingest::TradeTick>> by_stock;
  for (const auto& s : stocks) by_stock[s];
  for (const auto& t : ticks) {
    auto it = by_stock.find(t.stock_id);
    if (it != by_stock.end()) it->second.push_back(t);
  }
  std::vector<std::pair<std::string_view, const std::vector<ingest::TradeTick>*>> work;
  for (const auto& [stock, v] : by_stock) work.emplace_back(stock, &v);

  std::vector<std::vector<SlotMetrics>> parts(work.size());
  parallel_for(work.size(), threads, [&](std::size_t i) {
    parts[i] = stock_metrics(work[i].first, *work[i].second, calendar, shares, config);
  });
  std::vector<SlotMetrics> out;
  for (auto& p : parts) {
    for (auto& m : p) out.push_back(std::move(m));
  }
  return out;
}

namespace {

std::string et_field(const std::optional<ExcessTurnover>& et) {
  return et ? tsv::full(et->value) : std::string(tsv::kNA);
}

std::optional<ExcessTurnover> parse_et(std::string_view s, int window_used) {
  if (s == tsv::kNA) return std::nullopt;
  auto v = tsv::parse_double(s);
  if (!v) throw Error(ErrorCode::Format, "bad excess-turnover field");
  // Baselines are not exported; re-read metrics carry the value only.
  return ExcessTurnover{*v, 0.0, window_used};
}

}  // namespace

void write_metrics(const std::filesystem::path& path, std::span<const SlotMetrics> metrics) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << kMetricsHeader << '\n';
  for (const auto& m : metrics) {
    out << m.stock_id << '\t' << m.slot.date.to_string() << '\t' << to_string(m.slot.slot) << '\t'
        << tsv::full(m.turnover.total) << '\t' << tsv::full(m.turnover.institutional) << '\t'
        << tsv::full(m.turnover.retail) << '\t' << et_field(m.et_total) << '\t'
        << et_field(m.et_inst) << '\t' << et_field(m.et_retail) << '\t'
        << (m.et_total ? m.et_total->window_used : 0) << '\t'
        << tsv::full(m.alt_turnover.institutional) << '\t' << tsv::full(m.alt_turnover.retail)
        << '\t' << et_field(m.et_inst_alt) << '\t' << et_field(m.et_retail_alt) << '\n';
  }
}

std::vector<SlotMetrics> read_metrics(const std::filesystem::path& path) {
  std::vector<SlotMetrics> rows;
  const auto content = tsv::read_file(path);
  tsv::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (line_no == 1) {
      if (line != kMetricsHeader) throw Error(ErrorCode::Format, path.string() + ": bad header");
      return;
    }
    if (line.empty()) return;
    const auto f = tsv::split(line);
    auto fail = [&] {
      throw Error(ErrorCode::Format,
                  fmt::format("{}:{}: bad metrics row", path.string(), line_no));
    };
    if (f.size() != 14) fail();
    auto date = Date::parse(f[1]);
    auto slot = parse_slot(f[2]);
    auto tt = tsv::parse_double(f[3]);
    auto ti = tsv::parse_double(f[4]);
    auto tr = tsv::parse_double(f[5]);
    auto window = tsv::parse_int(f[9]);
    auto tia = tsv::parse_double(f[10]);
    auto tra = tsv::parse_double(f[11]);
    if (!date || !slot || !tt || !ti || !tr || !window || !tia || !tra) fail();
    SlotMetrics m;
    m.stock_id = std::string(f[0]);
    m.slot = SlotKey{*date, *slot};
    m.turnover = SlotTurnover{*ti, *tr, *tt};
    m.alt_turnover = SlotTurnover{*tia, *tra, *tia + *tra};
    const int w = static_cast<int>(*window);
    m.et_total = parse_et(f[6], w);
    m.et_inst = parse_et(f[7], w);
    m.et_retail = parse_et(f[8], w);
    m.et_inst_alt = parse_et(f[12], w);
    m.et_retail_alt = parse_et(f[13], w);
    rows.push_back(std::move(m));
  });
  return rows;
}

}  // namespace overtrade::microstructure

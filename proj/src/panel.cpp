#include "overtrade/panel.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

namespace overtrade::econometrics {

using regimes::CapTier;
using regimes::Regime;

std::optional<SentimentMeasure> parse_sentiment_measure(std::string_view text) {
  if (text == "mean") return SentimentMeasure::Mean;
  if (text == "sum") return SentimentMeasure::Sum;
  return std::nullopt;
}

std::string_view to_string(SentimentMeasure m) { return m == SentimentMeasure::Mean ? "mean" : "sum"; }

namespace {

using StockDate = std::pair<std::string_view, Date>;
using StockSlot = std::tuple<std::string_view, Date, Slot>;

std::string key_text(std::string_view stock, Date d, std::optional<Slot> s = std::nullopt) {
  return s ? fmt::format("({}, {}, {})", stock, d.to_string(), to_string(*s))
           : fmt::format("({}, {})", stock, d.to_string());
}

std::optional<double> et_value(const std::optional<microstructure::ExcessTurnover>& et) {
  return et ? std::optional<double>(et->value) : std::nullopt;
}

}  // namespace

std::vector<PanelRow> build_panel(std::span<const sentiment::HourSentiment> index,
                                  std::span<const microstructure::SlotMetrics> metrics,
                                  const RegimeMap& regime_map,
                                  std::span<const ingest::DailyFundamentals> fundamentals,
                                  const PanelOptions& options) {
  std::map<StockSlot, double> sentiment;
  for (const auto& h : index) {
    const double v = options.sentiment == SentimentMeasure::Mean ? h.value : h.score_sum;
    if (!sentiment.emplace(StockSlot{h.stock_id, h.slot.date, h.slot.slot}, v).second) {
      throw Error(ErrorCode::DataIntegrity,
                  "duplicate sentiment key " + key_text(h.stock_id, h.slot.date, h.slot.slot));
    }
  }
  std::map<StockDate, const ingest::DailyFundamentals*> fund;
  for (const auto& f : fundamentals) {
    if (!fund.emplace(StockDate{f.stock_id, f.date}, &f).second) {
      throw Error(ErrorCode::DataIntegrity, "duplicate fundamentals key " + key_text(f.stock_id, f.date));
    }
  }

  auto regime_of = [&](std::string_view stock, Date date) -> std::optional<Regime> {
    auto it = regime_map.find(regimes::exchange_of(stock));
    if (it == regime_map.end() || it->second.empty()) return std::nullopt;
    const auto& phases = it->second;
    if (date < phases.front().start || phases.back().end < date) return std::nullopt;
    return regimes::label_regime(date, phases);
  };
  auto tier_of = [&](std::string_view stock, Date date) -> std::optional<CapTier> {
    auto it = fund.find(StockDate{stock, options.tier_eval_date.value_or(date)});
    if (it == fund.end()) return std::nullopt;
    return regimes::cap_tier(it->second->float_cap, options.tiers);
  };

  std::set<StockSlot> seen;
  std::vector<PanelRow> rows;
  for (const auto& m : metrics) {
    if (!seen.emplace(m.stock_id, m.slot.date, m.slot.slot).second) {
      throw Error(ErrorCode::DataIntegrity,
                  "duplicate metrics key " + key_text(m.stock_id, m.slot.date, m.slot.slot));
    }
    if (m.slot.slot == Slot::S1) continue;
    PanelRow row;
    row.stock_id = m.stock_id;
    row.date = m.slot.date;
    row.slot = m.slot.slot;
    row.et = {et_value(m.et_total), et_value(m.et_inst), et_value(m.et_retail),
              et_value(m.et_inst_alt), et_value(m.et_retail_alt)};
    if (std::none_of(row.et.begin(), row.et.end(), [](const auto& v) { return v.has_value(); })) {
      continue;
    }
    bool any_lag = false;
    for (int k = 1; k <= 3; ++k) {
      const int prior = slot_index(row.slot) - k;
      if (prior < 1) break;
      auto it = sentiment.find(StockSlot{m.stock_id, row.date, static_cast<Slot>(prior)});
      if (it != sentiment.end()) {
        row.sentiment_lag[static_cast<std::size_t>(k - 1)] = it->second;
        any_lag = true;
      }
    }
    if (!any_lag) continue;
    if (auto it = fund.find(StockDate{m.stock_id, row.date}); it != fund.end()) {
      const auto& f = *it->second;
      row.controls = Controls{f.pb, f.market_risk_premium, f.market_return};
    }
    row.regime = regime_of(row.stock_id, row.date);
    row.tier = tier_of(row.stock_id, row.date);
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const PanelRow& a, const PanelRow& b) {
    return std::tie(a.stock_id, a.date, a.slot) < std::tie(b.stock_id, b.date, b.slot);
  });
  return rows;
}

std::string panel_header() {
  return "stock_id\tdate\tslot\tet_all\tet_inst\tet_retail\tet_inst_alt\tet_retail_alt\t"
         "sentiment_lag1\tsentiment_lag2\tsentiment_lag3\tpb\tmarket_risk_premium\t"
         "market_return\tregime\ttier";
}

void write_panel(const std::filesystem::path& path, std::span<const PanelRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << panel_header() << '\n';
  for (const auto& r : rows) {
    out << r.stock_id << '\t' << r.date.to_string() << '\t' << to_string(r.slot);
    for (const auto& v : r.et) out << '\t' << tsv::opt_full(v);
    for (const auto& v : r.sentiment_lag) out << '\t' << tsv::opt_full(v);
    if (r.controls) {
      out << '\t' << tsv::full(r.controls->pb) << '\t' << tsv::full(r.controls->market_risk_premium)
          << '\t' << tsv::full(r.controls->market_return);
    } else {
      out << '\t' << tsv::kNA << '\t' << tsv::kNA << '\t' << tsv::kNA;
    }
    out << '\t' << (r.regime ? regimes::to_string(*r.regime) : tsv::kNA) << '\t'
        << (r.tier ? regimes::to_string(*r.tier) : tsv::kNA) << '\n';
  }
}

std::vector<PanelRow> read_panel(const std::filesystem::path& path) {
  std::vector<PanelRow> rows;
  const auto content = tsv::read_file(path);
  const auto header = panel_header();
  tsv::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (line_no == 1) {
      if (line != header) throw Error(ErrorCode::Format, path.string() + ": bad header");
      return;
    }
    if (line.empty()) return;
    const auto f = tsv::split(line);
    auto fail = [&] {
      throw Error(ErrorCode::Format, fmt::format("{}:{}: bad panel row", path.string(), line_no));
    };
    auto opt = [&](std::string_view s) -> std::optional<double> {
      if (s == tsv::kNA) return std::nullopt;
      auto v = tsv::parse_double(s);
      if (!v) fail();
      return v;
    };
    if (f.size() != 16) fail();
    PanelRow r;
    r.stock_id = std::string(f[0]);
    auto date = Date::parse(f[1]);
    auto slot = parse_slot(f[2]);
    if (!date || !slot) fail();
    r.date = *date;
    r.slot = *slot;
    for (std::size_t i = 0; i < kEtColumns; ++i) r.et[i] = opt(f[3 + i]);
    for (std::size_t i = 0; i < 3; ++i) r.sentiment_lag[i] = opt(f[8 + i]);
    auto pb = opt(f[11]);
    auto mrp = opt(f[12]);
    auto mret = opt(f[13]);
    if (pb && mrp && mret) r.controls = Controls{*pb, *mrp, *mret};
    if (f[14] != tsv::kNA) {
      r.regime = regimes::parse_regime(f[14]);
      if (!r.regime) fail();
    }
    if (f[15] != tsv::kNA) {
      r.tier = regimes::parse_cap_tier(f[15]);
      if (!r.tier) fail();
    }
    rows.push_back(std::move(r));
  });
  return rows;
}

// ---------------------------------------------------------------- cells

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Base: return "base";
    case Variant::Lag2: return "lag2";
    case Variant::Lag3: return "lag3";
    case Variant::Controls: return "controls";
    case Variant::AltThreshold: return "alt_threshold";
  }
  return "?";
}

std::string_view to_string(InvestorPanel p) {
  switch (p) {
    case InvestorPanel::All: return "all";
    case InvestorPanel::Institutional: return "inst";
    case InvestorPanel::Retail: return "retail";
  }
  return "?";
}

std::string CellSpec::id() const {
  std::string filter = "full";
  if (regime) filter = std::string(regimes::to_string(*regime));
  if (tier) filter = std::string(regimes::to_string(*tier));
  return fmt::format("{}.{}.{}.{}", to_string(variant), filter, to_string(panel), to_string(slot));
}

std::string CellSpec::table() const {
  if (variant != Variant::Base) return "robustness";
  if (regime) return "T4";
  if (tier) return "T5";
  return panel == InvestorPanel::All ? "T2" : "T3";
}

int CellSpec::sentiment_lag() const {
  switch (variant) {
    case Variant::Lag2: return 2;
    case Variant::Lag3: return 3;
    default: return 1;
  }
}

EtColumn CellSpec::et_column() const {
  const bool alt = variant == Variant::AltThreshold;
  switch (panel) {
    case InvestorPanel::All: return EtColumn::All;
    case InvestorPanel::Institutional: return alt ? EtColumn::InstitutionalAlt : EtColumn::Institutional;
    case InvestorPanel::Retail: return alt ? EtColumn::RetailAlt : EtColumn::Retail;
  }
  return EtColumn::All;
}

std::vector<CellSpec> table_grid(const TableToggles& toggles) {
  constexpr InvestorPanel panels[] = {InvestorPanel::All, InvestorPanel::Institutional,
                                      InvestorPanel::Retail};
  constexpr Slot slots[] = {Slot::S2, Slot::S3, Slot::S4};
  std::vector<CellSpec> cells;
  if (toggles.base) {
    for (auto p : panels)
      for (auto s : slots) cells.push_back({Variant::Base, p, s, std::nullopt, std::nullopt});
  }
  if (toggles.regime) {
    for (auto p : panels)
      for (auto r : {Regime::Bull, Regime::Bear})
        for (auto s : slots) cells.push_back({Variant::Base, p, s, r, std::nullopt});
  }
  if (toggles.tier) {
    for (auto p : panels)
      for (auto t : {CapTier::Large, CapTier::Mid, CapTier::Small})
        for (auto s : slots) cells.push_back({Variant::Base, p, s, std::nullopt, t});
  }
  if (toggles.lags) {
    // lag k exists only for slots after the k-th
    for (auto p : panels)
      for (auto s : {Slot::S3, Slot::S4}) cells.push_back({Variant::Lag2, p, s, {}, {}});
    for (auto p : panels) cells.push_back({Variant::Lag3, p, Slot::S4, {}, {}});
  }
  if (toggles.controls) {
    for (auto p : panels)
      for (auto s : slots) cells.push_back({Variant::Controls, p, s, {}, {}});
  }
  if (toggles.alt_threshold) {
    for (auto p : {InvestorPanel::Institutional, InvestorPanel::Retail})
      for (auto s : slots) cells.push_back({Variant::AltThreshold, p, s, {}, {}});
  }
  return cells;
}

const Coefficient* RegressionReport::coefficient(std::string_view name) const {
  for (const auto& c : coefficients) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

CellData select_cell(std::span<const PanelRow> panel, const CellSpec& cell) {
  const auto lag = static_cast<std::size_t>(cell.sentiment_lag() - 1);
  const bool with_controls = cell.variant == Variant::Controls;
  const auto column = cell.et_column();

  std::vector<const PanelRow*> picked;
  for (const auto& r : panel) {
    if (r.slot != cell.slot) continue;
    if (cell.regime && r.regime != cell.regime) continue;
    if (cell.tier && r.tier != cell.tier) continue;
    if (!r.et_of(column) || !r.sentiment_lag[lag]) continue;
    if (with_controls && !r.controls) continue;
    picked.push_back(&r);
  }

  CellData data;
  const auto n = static_cast<Eigen::Index>(picked.size());
  const Eigen::Index k = with_controls ? 4 : 1;
  data.y.resize(n);
  data.x.resize(n, k);
  data.groups.reserve(picked.size());
  data.names = {"alpha", fmt::format("sentiment_lag{}", lag + 1)};
  if (with_controls) {
    data.names.insert(data.names.end(), {"pb", "market_risk_premium", "market_return"});
  }
  std::int64_t group = -1;
  std::string_view last_stock;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = *picked[static_cast<std::size_t>(i)];
    data.y(i) = *r.et_of(column);
    data.x(i, 0) = *r.sentiment_lag[lag];
    if (with_controls) {
      data.x(i, 1) = r.controls->pb;
      data.x(i, 2) = r.controls->market_risk_premium;
      data.x(i, 3) = r.controls->market_return;
    }
    if (group < 0 || r.stock_id != last_stock) {
      ++group;
      last_stock = r.stock_id;
    }
    data.groups.push_back(group);
  }
  return data;
}

RegressionReport run_cell(std::span<const PanelRow> panel, const CellSpec& cell,
                          const RunOptions& options) {
  RegressionReport report;
  report.cell = cell;
  const auto data = select_cell(panel, cell);
  report.n_obs = static_cast<std::size_t>(data.y.size());
  OlsFit fit;
  try {
    fit = fit_ols(data.x, data.y, data.names, options.covariance);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Underdetermined && e.code() != ErrorCode::Collinear) throw;
    report.sufficient = false;
    report.note = std::string(to_string(e.code()));
    return report;
  }
  report.sufficient = true;
  report.coefficients = fit.coefficients;
  report.r_squared = fit.r_squared;
  report.adj_r_squared = fit.adj_r_squared;
  report.f_statistic = fit.f_statistic;
  report.f_p_value = fit.f_p_value;
  report.wald_chi2 = fit.wald_chi2;
  report.wald_p_value = fit.wald_p_value;

  std::vector<std::string> notes;
  try {
    report.white = white_test(fit.residuals, data.x);
  } catch (const Error& e) {
    notes.push_back(fmt::format("white:{}", to_string(e.code())));
  }
  try {
    report.lm = lm_serial_test(fit.residuals, data.x, data.groups, options.lm_lags);
  } catch (const Error& e) {
    notes.push_back(fmt::format("lm:{}", to_string(e.code())));
  }
  report.note = fmt::format("{}", fmt::join(notes, ";"));
  return report;
}

std::vector<RegressionReport> run_table(std::span<const PanelRow> panel,
                                        std::span<const CellSpec> cells,
                                        const RunOptions& options) {
  std::vector<RegressionReport> reports(cells.size());
  parallel_for(cells.size(), options.threads,
               [&](std::size_t i) { reports[i] = run_cell(panel, cells[i], options); });
  return reports;
}

std::string_view significance_stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.10) return "*";
  return "";
}

namespace {

constexpr std::string_view kCoefficientSlots[] = {"alpha", "beta", "pb", "market_risk_premium",
                                                  "market_return"};

}  // namespace

std::string reports_header() {
  std::string h = "cell_id\ttable\tvariant\tfilter\tpanel\tslot\tstatus\tnote\tn_obs";
  for (auto name : kCoefficientSlots) {
    h += fmt::format("\t{0}\t{0}_se\t{0}_t\t{0}_p", name);
  }
  h += "\tbeta_stars\tr_squared\tadj_r_squared\tf_stat\tf_p\twald_chi2\twald_p\twhite_stat\twhite_p"
       "\twhite_df\tlm_stat\tlm_p\tlm_df";
  return h;
}

void write_reports(const std::filesystem::path& path, std::span<const RegressionReport> reports) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << reports_header() << '\n';
  for (const auto& r : reports) {
    const auto& c = r.cell;
    std::string filter = "full";
    if (c.regime) filter = std::string(regimes::to_string(*c.regime));
    if (c.tier) filter = std::string(regimes::to_string(*c.tier));
    out << c.id() << '\t' << c.table() << '\t' << to_string(c.variant) << '\t' << filter << '\t'
        << to_string(c.panel) << '\t' << to_string(c.slot) << '\t'
        << (r.sufficient ? "ok" : "insufficient-data") << '\t' << (r.note.empty() ? "-" : r.note)
        << '\t' << r.n_obs;
    for (std::size_t j = 0; j < std::size(kCoefficientSlots); ++j) {
      // beta is always the coefficient right after the intercept
      const Coefficient* coef = nullptr;
      if (j < 2) {
        if (r.coefficients.size() > j) coef = &r.coefficients[j];
      } else {
        coef = r.coefficient(kCoefficientSlots[j]);
      }
      if (coef) {
        out << '\t' << tsv::full(coef->estimate) << '\t' << tsv::full(coef->std_error) << '\t'
            << tsv::full(coef->t_stat) << '\t' << tsv::full(coef->p_value);
      } else {
        out << "\tNA\tNA\tNA\tNA";
      }
    }
    if (r.sufficient) {
      out << '\t' << (r.coefficients.size() > 1 ? significance_stars(r.coefficients[1].p_value) : "")
          << '\t' << tsv::full(r.r_squared) << '\t' << tsv::full(r.adj_r_squared) << '\t'
          << tsv::full(r.f_statistic) << '\t' << tsv::full(r.f_p_value) << '\t'
          << tsv::full(r.wald_chi2) << '\t' << tsv::full(r.wald_p_value);
    } else {
      out << "\tNA\tNA\tNA\tNA\tNA\tNA\tNA";
    }
    for (const auto* t : {&r.white, &r.lm}) {
      if (*t) {
        out << '\t' << tsv::full((*t)->statistic) << '\t' << tsv::full((*t)->p_value) << '\t'
            << (*t)->df;
      } else {
        out << "\tNA\tNA\tNA";
      }
    }
    out << '\n';
  }
}

std::string format_tables(std::span<const RegressionReport> reports) {
  // One line per (variant, filter, panel); one column per slot.
  std::ostringstream out;
  std::string current_table;
  std::string current_line;
  std::array<std::string, 3> columns;
  auto flush = [&] {
    if (current_line.empty()) return;
    out << fmt::format("{:<28}{:>30}{:>30}{:>30}\n", current_line, columns[0], columns[1], columns[2]);
    columns = {};
  };
  for (const auto& r : reports) {
    const auto& c = r.cell;
    std::string filter = "full";
    if (c.regime) filter = std::string(regimes::to_string(*c.regime));
    if (c.tier) filter = std::string(regimes::to_string(*c.tier));
    auto line = fmt::format("{} {} {}", to_string(c.variant), filter, to_string(c.panel));
    if (c.table() != current_table || line != current_line) flush();
    if (c.table() != current_table) {
      current_table = c.table();
      out << "\n== " << current_table << " ==   beta (t) [n]\n";
      out << fmt::format("{:<28}{:>30}{:>30}{:>30}\n", "", "S2", "S3", "S4");
    }
    current_line = line;
    auto& column = columns[static_cast<std::size_t>(slot_index(c.slot) - 2)];
    if (r.sufficient && r.coefficients.size() > 1) {
      const auto& b = r.coefficients[1];
      column = fmt::format("{:.4f}{:<3} ({:.2f}) [{}]", b.estimate, significance_stars(b.p_value),
                           b.t_stat, r.n_obs);
    } else {
      column = fmt::format("insufficient [{}]", r.n_obs);
    }
  }
  flush();
  return out.str();
}

}  // namespace overtrade::econometrics

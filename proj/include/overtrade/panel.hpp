#pragma once

// Regression panel assembly and the table-cell grid.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "overtrade/common.hpp"
#include "overtrade/econometrics.hpp"
#include "overtrade/ingest.hpp"
#include "overtrade/microstructure.hpp"
#include "overtrade/regimes.hpp"
#include "overtrade/sentiment.hpp"

namespace overtrade::econometrics {

enum class EtColumn : std::size_t {
  All = 0,
  Institutional = 1,
  Retail = 2,
  InstitutionalAlt = 3,
  RetailAlt = 4,
};
inline constexpr std::size_t kEtColumns = 5;

struct Controls {
  double pb = 0.0;
  double market_risk_premium = 0.0;
  double market_return = 0.0;
};

struct PanelRow {
  std::string stock_id;
  Date date;
  Slot slot = Slot::S2;
  std::array<std::optional<double>, kEtColumns> et;
  // [k-1] holds the sentiment index of slot (slot - k) of the same day.
  std::array<std::optional<double>, 3> sentiment_lag;
  std::optional<Controls> controls;
  std::optional<regimes::Regime> regime;
  std::optional<regimes::CapTier> tier;

  const std::optional<double>& et_of(EtColumn c) const { return et[static_cast<std::size_t>(c)]; }
};

enum class SentimentMeasure { Mean, Sum };
std::optional<SentimentMeasure> parse_sentiment_measure(std::string_view text);
std::string_view to_string(SentimentMeasure m);

// Phases per exchange code ("SH", "SZ").
using RegimeMap = std::map<std::string, std::vector<regimes::RegimePhase>, std::less<>>;

struct PanelOptions {
  SentimentMeasure sentiment = SentimentMeasure::Mean;
  regimes::TierThresholds tiers{};
  std::optional<Date> tier_eval_date;  // fixes each stock's tier to this date
};

// One row per (stock, date, slot in S2..S4) carrying at least one excess
// turnover value and at least one sentiment lag, sorted by (stock, date,
// slot). Absent inputs stay absent. Throws Error(DataIntegrity) on duplicate
// keys in any input.
std::vector<PanelRow> build_panel(std::span<const sentiment::HourSentiment> index,
                                  std::span<const microstructure::SlotMetrics> metrics,
                                  const RegimeMap& regimes,
                                  std::span<const ingest::DailyFundamentals> fundamentals,
                                  const PanelOptions& options = {});

std::string panel_header();
void write_panel(const std::filesystem::path& path, std::span<const PanelRow> rows);
std::vector<PanelRow> read_panel(const std::filesystem::path& path);

enum class Variant { Base, Lag2, Lag3, Controls, AltThreshold };
enum class InvestorPanel { All, Institutional, Retail };
std::string_view to_string(Variant v);
std::string_view to_string(InvestorPanel p);

struct CellSpec {
  Variant variant = Variant::Base;
  InvestorPanel panel = InvestorPanel::All;
  Slot slot = Slot::S2;
  std::optional<regimes::Regime> regime;
  std::optional<regimes::CapTier> tier;

  std::string id() const;
  std::string table() const;  // T2, T3, T4, T5 or robustness
  int sentiment_lag() const;
  EtColumn et_column() const;
};

struct TableToggles {
  bool base = true;
  bool regime = true;
  bool tier = true;
  bool lags = true;
  bool controls = true;
  bool alt_threshold = true;

  bool operator==(const TableToggles&) const = default;
};

std::vector<CellSpec> table_grid(const TableToggles& toggles = {});

struct RegressionReport {
  CellSpec cell;
  bool sufficient = false;
  std::string note;  // why a cell is insufficient, or which diagnostic failed
  std::size_t n_obs = 0;
  std::vector<Coefficient> coefficients;
  double r_squared = 0.0;
  double adj_r_squared = 0.0;
  double f_statistic = 0.0;
  double f_p_value = 1.0;
  double wald_chi2 = 0.0;
  double wald_p_value = 1.0;
  std::optional<TestResult> white;
  std::optional<TestResult> lm;

  const Coefficient* coefficient(std::string_view name) const;
};

struct RunOptions {
  Covariance covariance = Covariance::Classical;
  int lm_lags = 1;
  unsigned threads = 1;
};

// Rows of one cell in panel order, as (response, regressors, LM groups).
struct CellData {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;
  std::vector<std::int64_t> groups;  // stock ordinal; rows of a stock are dated in order
  std::vector<std::string> names;    // intercept first
};
CellData select_cell(std::span<const PanelRow> panel, const CellSpec& cell);

RegressionReport run_cell(std::span<const PanelRow> panel, const CellSpec& cell,
                          const RunOptions& options);
// Reports come back in `cells` order regardless of thread count.
std::vector<RegressionReport> run_table(std::span<const PanelRow> panel,
                                        std::span<const CellSpec> cells,
                                        const RunOptions& options);

// "***" p < 0.01, "**" p < 0.05, "*" p < 0.10.
std::string_view significance_stars(double p);

std::string reports_header();
void write_reports(const std::filesystem::path& path, std::span<const RegressionReport> reports);
// Fixed-width text rendering grouped like the published tables.
std::string format_tables(std::span<const RegressionReport> reports);

}  // namespace overtrade::econometrics

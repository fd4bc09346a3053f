#pragma once

// Configuration, stage orchestration, descriptive statistics and the run
// manifest.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "overtrade/common.hpp"
#include "overtrade/lexicon.hpp"
#include "overtrade/microstructure.hpp"
#include "overtrade/panel.hpp"

namespace overtrade::pipeline {

namespace fs = std::filesystem;

struct PipelineConfig {
  fs::path posts;
  fs::path trades;
  fs::path shares;
  fs::path fundamentals;
  fs::path calendar;
  fs::path index_sh;
  fs::path index_sz;
  std::optional<fs::path> membership;
  std::optional<fs::path> accuracy_fixture;
  std::vector<fs::path> lexicon;  // highest priority first
  std::vector<fs::path> negations;
  std::vector<std::string> bot_ids{ingest::kDefaultBotIds.begin(), ingest::kDefaultBotIds.end()};
  lexicon::ConflictPolicy conflict_policy = lexicon::ConflictPolicy::FirstWins;
  std::size_t frequency_threshold = 80;

  double amount_threshold = 200'000.0;
  double share_threshold = 100'000.0;
  double robust_amount_threshold = 500'000.0;
  microstructure::TurnoverMeasure turnover_measure = microstructure::TurnoverMeasure::ValueOverShares;
  bool turnover_cumulative = false;
  microstructure::BaselineMode baseline_mode = microstructure::BaselineMode::SameSlot;
  int baseline_window = 20;
  int min_window = 10;

  std::size_t regime_window = 105;
  std::size_t regime_min_phase = 105;
  double tier_large = 1e11;
  double tier_mid = 1e10;
  std::optional<Date> tier_eval_date;

  double max_empty_slot_fraction = 0.10;
  std::size_t max_suspension_days = 30;
  bool index_churn_filter = false;
  std::size_t max_index_changes = 2;

  econometrics::SentimentMeasure sentiment_measure = econometrics::SentimentMeasure::Mean;
  econometrics::Covariance covariance = econometrics::Covariance::Classical;
  int lm_lags = 1;
  econometrics::TableToggles tables{};

  fs::path out_dir = "out";
  std::uint64_t seed = 1;
  unsigned threads = 1;

  bool operator==(const PipelineConfig&) const = default;

  // Assigns one key. Relative paths resolve against `base_dir`.
  // Throws Error(Config) on an unknown key or unparsable value.
  void set(std::string_view key, std::string_view value, const fs::path& base_dir);

  microstructure::MetricsConfig metrics_config() const;
};

// "key = value" lines; '#' starts a comment line.
PipelineConfig parse_config(std::string_view text, const fs::path& base_dir);
PipelineConfig load_config(const fs::path& path);

// Every key, in a fixed order. Without run settings, `out_dir` and `threads`
// are left out so the text does not depend on where or how a run happened.
std::string to_text(const PipelineConfig& config, bool include_run_settings = true);

// Numeric invariants, then input existence. Problems with an input are
// raised as a StageError of the stage that reads it.
void validate(const PipelineConfig& config);

class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause);
  const std::string& stage() const { return stage_; }
  ErrorCode cause() const { return code(); }

 private:
  std::string stage_;
};

struct ManifestRow {
  std::string stage;
  std::size_t rows_in = 0;
  std::size_t rows_accepted = 0;
  std::size_t rows_rejected = 0;

  bool operator==(const ManifestRow&) const = default;
};

inline constexpr std::string_view kManifestHeader = "stage\trows_in\trows_accepted\trows_rejected";
std::vector<ManifestRow> read_manifest(const fs::path& path);
void write_manifest(const fs::path& path, std::span<const ManifestRow> rows);

struct DescriptiveStats {
  std::string variable;
  std::size_t n = 0;
  double mean = 0.0;
  double std_dev = 0.0;  // sample, n - 1 denominator; 0 for a single value
  double max = 0.0;
  double min = 0.0;
};

// Throws Error(EmptySample) on an empty column.
DescriptiveStats describe(std::string_view variable, std::span<const double> column);
std::vector<DescriptiveStats> describe_panel(std::span<const econometrics::PanelRow> panel);
void write_descriptive(const fs::path& path, std::span<const DescriptiveStats> stats);

inline constexpr std::string_view kStages[] = {"ingest", "sentiment", "metrics", "regimes",
                                              "panel",  "regress",   "describe"};

// Each stage reads its inputs (or earlier artifacts) from disk, writes its
// artifacts into config.out_dir and updates manifest.tsv. Failures surface
// as StageError.
void run_ingest(const PipelineConfig& config);
void run_sentiment(const PipelineConfig& config);
void run_metrics(const PipelineConfig& config);
void run_regimes(const PipelineConfig& config);
void run_panel(const PipelineConfig& config);
void run_regress(const PipelineConfig& config);
void run_describe(const PipelineConfig& config);

// All stages in order, plus effective_config.txt.
void run_pipeline(const PipelineConfig& config);

}  // namespace overtrade::pipeline

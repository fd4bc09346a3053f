#pragma once

// Bull/bear dating of an index series and market-cap tiers.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "overtrade/common.hpp"

namespace overtrade::regimes {

struct IndexPoint {
  Date date;
  double level = 0.0;
};

// Dates strictly increasing, levels positive; enforced on construction.
class IndexSeries {
 public:
  IndexSeries() = default;
  explicit IndexSeries(std::vector<IndexPoint> points);

  const std::vector<IndexPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  std::vector<double> levels() const;

 private:
  std::vector<IndexPoint> points_;
};

IndexSeries load_index_series(const std::filesystem::path& path);
void write_index_series(const std::filesystem::path& path, const IndexSeries& series);

enum class Regime { Bull, Bear };
std::string_view to_string(Regime r);
std::optional<Regime> parse_regime(std::string_view text);

struct TurningPoint {
  enum class Kind { Peak, Trough };
  std::size_t index = 0;
  Kind kind = Kind::Peak;
  bool operator==(const TurningPoint&) const = default;
};

// Candidate extremes: position i with a full +/-window neighbourhood where the
// level is >= every neighbour and > every earlier neighbour (first of a
// plateau wins); mirror for troughs.
std::vector<TurningPoint> candidate_turning_points(std::span<const double> levels,
                                                   std::size_t window);

// Candidates, then alternation (higher peak / lower trough survives, earlier
// on ties), then removal of interior phases shorter than min_phase (the
// shortest first, both bounding points dropped).
std::vector<TurningPoint> turning_points(std::span<const double> levels, std::size_t window,
                                         std::size_t min_phase);

struct RegimePhase {
  Regime kind = Regime::Bull;
  Date start;  // inclusive
  Date end;    // inclusive; a turning-point date ends its phase
  std::size_t first_index = 0;
  std::size_t last_index = 0;
};

inline constexpr std::size_t kDefaultWindow = 105;  // 5 months of 21 trading days

// Throws Error(InsufficientHistory) unless size > 2 * window.
std::vector<RegimePhase> date_regimes(const IndexSeries& series, std::size_t window = kDefaultWindow,
                                      std::size_t min_phase = kDefaultWindow);

// Throws Error(Undated) outside the dated range.
Regime label_regime(Date date, std::span<const RegimePhase> phases);

inline constexpr std::string_view kPhasesHeader = "kind\tstart\tend";
void write_phases(const std::filesystem::path& path, std::span<const RegimePhase> phases);
std::vector<RegimePhase> read_phases(const std::filesystem::path& path);

enum class CapTier { Large, Mid, Small };
std::string_view to_string(CapTier t);
std::optional<CapTier> parse_cap_tier(std::string_view text);

struct TierThresholds {
  double large = 1e11;  // strictly above -> Large
  double mid = 1e10;    // at or above -> Mid
};

// Throws Error(NegativeCap) for a negative float cap.
CapTier cap_tier(double float_cap, const TierThresholds& thresholds = {});

// Exchange of a ticker: ".SH"/".SZ" suffix when present, else a leading '6'
// means Shanghai.
std::string exchange_of(std::string_view stock_id);

}  // namespace overtrade::regimes

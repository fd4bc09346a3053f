#include "overtrade/regimes.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <cctype>
#include <fstream>
#include <limits>

#include <fmt/format.h>

namespace overtrade::regimes {

IndexSeries::IndexSeries(std::vector<IndexPoint> points) : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i].level > 0.0) || !std::isfinite(points_[i].level)) {
      throw Error(ErrorCode::InvalidArgument,
                  "index level must be positive at " + points_[i].date.to_string());
    }
    if (i > 0 && !(points_[i - 1].date < points_[i].date)) {
      throw Error(ErrorCode::InvalidArgument,
                  "index dates must be strictly increasing at " + points_[i].date.to_string());
    }
  }
}

std::vector<double> IndexSeries::levels() const {
  std::vector<double> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back(p.level);
  return out;
}

IndexSeries load_index_series(const std::filesystem::path& path) {
  std::vector<IndexPoint> points;
  const auto content = tsv::read_file(path);
  tsv::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (tsv::trim(line).empty() || line.front() == '#') return;
    if (line_no == 1 && line == "date\tlevel") return;
    const auto f = tsv::split(line);
    auto date = f.size() == 2 ? Date::parse(tsv::trim(f[0])) : std::nullopt;
    auto level = f.size() == 2 ? tsv::parse_double(f[1]) : std::nullopt;
    if (!date || !level) {
      throw Error(ErrorCode::Format,
                  fmt::format("{}:{}: expected date<TAB>level", path.string(), line_no));
    }
    points.push_back({*date, *level});
  });
  return IndexSeries(std::move(points));
}

void write_index_series(const std::filesystem::path& path, const IndexSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "date\tlevel\n";
  for (const auto& p : series.points()) out << p.date.to_string() << '\t' << tsv::full(p.level) << '\n';
}

std::string_view to_string(Regime r) { return r == Regime::Bull ? "bull" : "bear"; }

std::optional<Regime> parse_regime(std::string_view text) {
  if (text == "bull") return Regime::Bull;
  if (text == "bear") return Regime::Bear;
  return std::nullopt;
}

namespace {

// out[j] = extreme of levels[j-w+1 .. j] for j >= w-1, via a monotonic deque.
template <class Better>
std::vector<double> sliding_extreme(std::span<const double> levels, std::size_t w, Better better) {
  std::vector<double> out(levels.size(), 0.0);
  std::deque<std::size_t> dq;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    while (!dq.empty() && !better(levels[dq.back()], levels[j])) dq.pop_back();
    dq.push_back(j);
    if (dq.front() + w <= j) dq.pop_front();
    out[j] = levels[dq.front()];
  }
  return out;
}

}  // namespace

std::vector<TurningPoint> candidate_turning_points(std::span<const double> levels,
                                                   std::size_t window) {
  std::vector<TurningPoint> out;
  const std::size_t n = levels.size();
  if (window == 0 || n < 2 * window + 1) return out;
  const auto max_w = sliding_extreme(levels, window, [](double a, double b) { return a > b; });
  const auto min_w = sliding_extreme(levels, window, [](double a, double b) { return a < b; });
  for (std::size_t i = window; i + window < n; ++i) {
    const double v = levels[i];
    if (v > max_w[i - 1] && v >= max_w[i + window]) {
      out.push_back({i, TurningPoint::Kind::Peak});
    } else if (v < min_w[i - 1] && v <= min_w[i + window]) {
      out.push_back({i, TurningPoint::Kind::Trough});
    }
  }
  return out;
}

std::vector<TurningPoint> turning_points(std::span<const double> levels, std::size_t window,
                                         std::size_t min_phase) {
  std::vector<TurningPoint> alt;
  for (const auto& tp : candidate_turning_points(levels, window)) {
    if (!alt.empty() && alt.back().kind == tp.kind) {
      const double kept = levels[alt.back().index];
      const double next = levels[tp.index];
      const bool replace = tp.kind == TurningPoint::Kind::Peak ? next > kept : next < kept;
      if (replace) alt.back() = tp;
      continue;
    }
    alt.push_back(tp);
  }
  while (alt.size() >= 2) {
    std::size_t shortest = 0;
    std::size_t best_len = std::numeric_limits<std::size_t>::max();
    for (std::size_t k = 0; k + 1 < alt.size(); ++k) {
      const std::size_t len = alt[k + 1].index - alt[k].index;
      if (len < best_len) {
        best_len = len;
        shortest = k;
      }
    }
    if (best_len >= min_phase) break;
    alt.erase(alt.begin() + static_cast<std::ptrdiff_t>(shortest),
              alt.begin() + static_cast<std::ptrdiff_t>(shortest) + 2);
  }
  return alt;
}

std::vector<RegimePhase> date_regimes(const IndexSeries& series, std::size_t window,
                                      std::size_t min_phase) {
  if (window == 0) throw Error(ErrorCode::Config, "regime window must be >= 1");
  const std::size_t n = series.size();
  if (n <= 2 * window) {
    throw Error(ErrorCode::InsufficientHistory,
                fmt::format("index series has {} points, needs more than {}", n, 2 * window));
  }
  const auto levels = series.levels();
  const auto tps = turning_points(levels, window, min_phase);
  const auto& pts = series.points();
  auto make = [&](Regime kind, std::size_t first, std::size_t last) {
    return RegimePhase{kind, pts[first].date, pts[last].date, first, last};
  };

  std::vector<RegimePhase> phases;
  if (tps.empty()) {
    phases.push_back(make(levels.back() >= levels.front() ? Regime::Bull : Regime::Bear, 0, n - 1));
    return phases;
  }
  auto ending_at = [](TurningPoint::Kind k) {
    return k == TurningPoint::Kind::Peak ? Regime::Bull : Regime::Bear;
  };
  auto starting_at = [](TurningPoint::Kind k) {
    return k == TurningPoint::Kind::Peak ? Regime::Bear : Regime::Bull;
  };
  phases.push_back(make(ending_at(tps.front().kind), 0, tps.front().index));
  for (std::size_t k = 0; k + 1 < tps.size(); ++k) {
    phases.push_back(make(starting_at(tps[k].kind), tps[k].index + 1, tps[k + 1].index));
  }
  if (tps.back().index + 1 < n) {
    phases.push_back(make(starting_at(tps.back().kind), tps.back().index + 1, n - 1));
  }
  return phases;
}

Regime label_regime(Date date, std::span<const RegimePhase> phases) {
  if (phases.empty() || date < phases.front().start || phases.back().end < date) {
    throw Error(ErrorCode::Undated, date.to_string() + " is outside the dated range");
  }
  auto it = std::lower_bound(phases.begin(), phases.end(), date,
                             [](const RegimePhase& p, Date d) { return p.end < d; });
  return it->kind;
}

void write_phases(const std::filesystem::path& path, std::span<const RegimePhase> phases) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << kPhasesHeader << '\n';
  for (const auto& p : phases) {
    out << to_string(p.kind) << '\t' << p.start.to_string() << '\t' << p.end.to_string() << '\n';
  }
}

std::vector<RegimePhase> read_phases(const std::filesystem::path& path) {
  std::vector<RegimePhase> phases;
  const auto content = tsv::read_file(path);
  tsv::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (line_no == 1) {
      if (line != kPhasesHeader) throw Error(ErrorCode::Format, path.string() + ": bad header");
      return;
    }
    if (line.empty()) return;
    const auto f = tsv::split(line);
    auto kind = f.size() == 3 ? parse_regime(f[0]) : std::nullopt;
    auto start = f.size() == 3 ? Date::parse(f[1]) : std::nullopt;
    auto end = f.size() == 3 ? Date::parse(f[2]) : std::nullopt;
    if (!kind || !start || !end) {
      throw Error(ErrorCode::Format, fmt::format("{}:{}: bad phase row", path.string(), line_no));
    }
    phases.push_back({*kind, *start, *end, 0, 0});
  });
  return phases;
}

std::string_view to_string(CapTier t) {
  switch (t) {
    case CapTier::Large: return "large";
    case CapTier::Mid: return "mid";
    case CapTier::Small: return "small";
  }
  return "?";
}

std::optional<CapTier> parse_cap_tier(std::string_view text) {
  if (text == "large") return CapTier::Large;
  if (text == "mid") return CapTier::Mid;
  if (text == "small") return CapTier::Small;
  return std::nullopt;
}

CapTier cap_tier(double float_cap, const TierThresholds& thresholds) {
  if (float_cap < 0.0) throw Error(ErrorCode::NegativeCap, "float cap must be >= 0");
  if (float_cap > thresholds.large) return CapTier::Large;
  if (float_cap >= thresholds.mid) return CapTier::Mid;
  return CapTier::Small;
}

std::string exchange_of(std::string_view stock_id) {
  if (auto dot = stock_id.rfind('.'); dot != std::string_view::npos) {
    std::string suffix(stock_id.substr(dot + 1));
    for (auto& c : suffix) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return suffix;
  }
  return !stock_id.empty() && stock_id.front() == '6' ? "SH" : "SZ";
}

}  // namespace overtrade::regimes

#include "overtrade/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>

#include "overtrade/ingest.hpp"
#include "overtrade/regimes.hpp"
#include "overtrade/sentiment.hpp"

namespace overtrade::pipeline {

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::Config, fmt::format("invalid value '{}' for {}", value, key));
}

double as_double(std::string_view key, std::string_view value) {
  auto v = tsv::parse_double(value);
  if (!v || !std::isfinite(*v)) bad_value(key, value);
  return *v;
}

std::int64_t as_int(std::string_view key, std::string_view value) {
  auto v = tsv::parse_int(value);
  if (!v) bad_value(key, value);
  return *v;
}

std::size_t as_count(std::string_view key, std::string_view value) {
  const auto v = as_int(key, value);
  if (v < 0) bad_value(key, value);
  return static_cast<std::size_t>(v);
}

bool as_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "yes" || value == "1") return true;
  if (value == "false" || value == "no" || value == "0") return false;
  bad_value(key, value);
}

template <class T>
T as_enum(std::string_view key, std::string_view value,
          std::optional<T> (*parse)(std::string_view)) {
  auto v = parse(value);
  if (!v) bad_value(key, value);
  return *v;
}

fs::path resolve(const fs::path& base_dir, std::string_view value) {
  fs::path p{std::string(value)};
  if (p.is_relative()) p = (base_dir.empty() ? fs::current_path() : fs::absolute(base_dir)) / p;
  return p.lexically_normal();
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  for (auto part : tsv::split(value, ',')) {
    part = tsv::trim(part);
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

std::string join_paths(const std::vector<fs::path>& paths) {
  std::vector<std::string> parts;
  for (const auto& p : paths) parts.push_back(p.string());
  return fmt::format("{}", fmt::join(parts, ","));
}

std::string_view bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

void PipelineConfig::set(std::string_view key, std::string_view value, const fs::path& base_dir) {
  key = tsv::trim(key);
  value = tsv::trim(value);
  auto path_list = [&] {
    std::vector<fs::path> out;
    for (const auto& p : split_list(value)) out.push_back(resolve(base_dir, p));
    return out;
  };
  auto optional_path = [&]() -> std::optional<fs::path> {
    if (value.empty()) return std::nullopt;
    return resolve(base_dir, value);
  };

  if (key == "posts") posts = resolve(base_dir, value);
  else if (key == "trades") trades = resolve(base_dir, value);
  else if (key == "shares") shares = resolve(base_dir, value);
  else if (key == "fundamentals") fundamentals = resolve(base_dir, value);
  else if (key == "calendar") calendar = resolve(base_dir, value);
  else if (key == "index_sh") index_sh = resolve(base_dir, value);
  else if (key == "index_sz") index_sz = resolve(base_dir, value);
  else if (key == "membership") membership = optional_path();
  else if (key == "accuracy_fixture") accuracy_fixture = optional_path();
  else if (key == "lexicon") lexicon = path_list();
  else if (key == "negations") negations = path_list();
  else if (key == "bot_ids") bot_ids = split_list(value);
  else if (key == "conflict_policy") conflict_policy = as_enum(key, value, lexicon::parse_conflict_policy);
  else if (key == "frequency_threshold") frequency_threshold = as_count(key, value);
  else if (key == "amount_threshold") amount_threshold = as_double(key, value);
  else if (key == "share_threshold") share_threshold = as_double(key, value);
  else if (key == "robust_amount_threshold") robust_amount_threshold = as_double(key, value);
  else if (key == "turnover_measure") turnover_measure = as_enum(key, value, microstructure::parse_turnover_measure);
  else if (key == "turnover_cumulative") turnover_cumulative = as_bool(key, value);
  else if (key == "baseline_mode") baseline_mode = as_enum(key, value, microstructure::parse_baseline_mode);
  else if (key == "baseline_window") baseline_window = static_cast<int>(as_int(key, value));
  else if (key == "min_window") min_window = static_cast<int>(as_int(key, value));
  else if (key == "regime_window") regime_window = as_count(key, value);
  else if (key == "regime_min_phase") regime_min_phase = as_count(key, value);
  else if (key == "tier_large") tier_large = as_double(key, value);
  else if (key == "tier_mid") tier_mid = as_double(key, value);
  else if (key == "tier_eval_date") {
    if (value.empty()) {
      tier_eval_date.reset();
    } else {
      tier_eval_date = Date::parse(value);
      if (!tier_eval_date) bad_value(key, value);
    }
  }
  else if (key == "max_empty_slot_fraction") max_empty_slot_fraction = as_double(key, value);
  else if (key == "max_suspension_days") max_suspension_days = as_count(key, value);
  else if (key == "index_churn_filter") index_churn_filter = as_bool(key, value);
  else if (key == "max_index_changes") max_index_changes = as_count(key, value);
  else if (key == "sentiment_measure") sentiment_measure = as_enum(key, value, econometrics::parse_sentiment_measure);
  else if (key == "covariance") covariance = as_enum(key, value, econometrics::parse_covariance);
  else if (key == "lm_lags") lm_lags = static_cast<int>(as_int(key, value));
  else if (key == "table_base") tables.base = as_bool(key, value);
  else if (key == "table_regime") tables.regime = as_bool(key, value);
  else if (key == "table_tier") tables.tier = as_bool(key, value);
  else if (key == "table_lags") tables.lags = as_bool(key, value);
  else if (key == "table_controls") tables.controls = as_bool(key, value);
  else if (key == "table_alt_threshold") tables.alt_threshold = as_bool(key, value);
  else if (key == "out_dir") out_dir = resolve(base_dir, value);
  else if (key == "seed") seed = static_cast<std::uint64_t>(as_int(key, value));
  else if (key == "threads") threads = static_cast<unsigned>(std::max<std::int64_t>(1, as_int(key, value)));
  else throw Error(ErrorCode::Config, fmt::format("unknown config key '{}'", key));
}

microstructure::MetricsConfig PipelineConfig::metrics_config() const {
  microstructure::MetricsConfig m;
  m.thresholds = {amount_threshold, share_threshold};
  m.alt_thresholds = {robust_amount_threshold, share_threshold};
  m.measure = turnover_measure;
  m.cumulative = turnover_cumulative;
  m.baseline = baseline_mode;
  m.window = {baseline_window, min_window};
  return m;
}

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
  PipelineConfig config;
  tsv::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto trimmed = tsv::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') return;
    const auto eq = trimmed.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::Config, fmt::format("line {}: expected key = value", line_no));
    }
    config.set(trimmed.substr(0, eq), trimmed.substr(eq + 1), base_dir);
  });
  return config;
}

PipelineConfig load_config(const fs::path& path) {
  return parse_config(tsv::read_file(path), path.parent_path());
}

std::string to_text(const PipelineConfig& c, bool include_run_settings) {
  std::string out;
  auto put = [&](std::string_view key, std::string_view value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  put("posts", c.posts.string());
  put("trades", c.trades.string());
  put("shares", c.shares.string());
  put("fundamentals", c.fundamentals.string());
  put("calendar", c.calendar.string());
  put("index_sh", c.index_sh.string());
  put("index_sz", c.index_sz.string());
  put("membership", c.membership ? c.membership->string() : "");
  put("accuracy_fixture", c.accuracy_fixture ? c.accuracy_fixture->string() : "");
  put("lexicon", join_paths(c.lexicon));
  put("negations", join_paths(c.negations));
  put("bot_ids", fmt::format("{}", fmt::join(c.bot_ids, ",")));
  put("conflict_policy", lexicon::to_string(c.conflict_policy));
  put("frequency_threshold", std::to_string(c.frequency_threshold));
  put("amount_threshold", tsv::full(c.amount_threshold));
  put("share_threshold", tsv::full(c.share_threshold));
  put("robust_amount_threshold", tsv::full(c.robust_amount_threshold));
  put("turnover_measure", microstructure::to_string(c.turnover_measure));
  put("turnover_cumulative", bool_text(c.turnover_cumulative));
  put("baseline_mode", microstructure::to_string(c.baseline_mode));
  put("baseline_window", std::to_string(c.baseline_window));
  put("min_window", std::to_string(c.min_window));
  put("regime_window", std::to_string(c.regime_window));
  put("regime_min_phase", std::to_string(c.regime_min_phase));
  put("tier_large", tsv::full(c.tier_large));
  put("tier_mid", tsv::full(c.tier_mid));
  put("tier_eval_date", c.tier_eval_date ? c.tier_eval_date->to_string() : "");
  put("max_empty_slot_fraction", tsv::full(c.max_empty_slot_fraction));
  put("max_suspension_days", std::to_string(c.max_suspension_days));
  put("index_churn_filter", bool_text(c.index_churn_filter));
  put("max_index_changes", std::to_string(c.max_index_changes));
  put("sentiment_measure", econometrics::to_string(c.sentiment_measure));
  put("covariance", econometrics::to_string(c.covariance));
  put("lm_lags", std::to_string(c.lm_lags));
  put("table_base", bool_text(c.tables.base));
  put("table_regime", bool_text(c.tables.regime));
  put("table_tier", bool_text(c.tables.tier));
  put("table_lags", bool_text(c.tables.lags));
  put("table_controls", bool_text(c.tables.controls));
  put("table_alt_threshold", bool_text(c.tables.alt_threshold));
  put("seed", std::to_string(c.seed));
  if (include_run_settings) {
    put("out_dir", c.out_dir.string());
    put("threads", std::to_string(c.threads));
  }
  return out;
}

StageError::StageError(std::string stage, const Error& cause)
    : Error(cause.code(), fmt::format("stage {} failed: {}", stage, cause.what()), Verbatim{}),
      stage_(std::move(stage)) {}

namespace {

// Runs `body`, attributing any failure to `stage`.
template <class F>
void in_stage(std::string_view stage, F&& body) {
  try {
    body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(std::string(stage), e);
  } catch (const std::exception& e) {
    throw StageError(std::string(stage), Error(ErrorCode::Io, e.what()));
  }
}

void require_file(std::string_view what, const fs::path& path) {
  if (path.empty()) throw Error(ErrorCode::Config, fmt::format("no {} file configured", what));
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorCode::Io, fmt::format("{} file not found: {}", what, path.string()));
  }
}

void require_inputs(std::string_view stage, const PipelineConfig& c) {
  in_stage(stage, [&] {
    if (stage == "ingest") {
      require_file("calendar", c.calendar);
      require_file("posts", c.posts);
      require_file("trades", c.trades);
      require_file("shares", c.shares);
      require_file("fundamentals", c.fundamentals);
      if (c.membership) require_file("membership", *c.membership);
    } else if (stage == "sentiment") {
      if (c.lexicon.empty()) throw Error(ErrorCode::Config, "no lexicon files configured");
      for (const auto& p : c.lexicon) require_file("lexicon", p);
      for (const auto& p : c.negations) require_file("negations", p);
      if (c.accuracy_fixture) require_file("accuracy fixture", *c.accuracy_fixture);
    } else if (stage == "regimes") {
      require_file("SH index", c.index_sh);
      require_file("SZ index", c.index_sz);
    }
  });
}

}  // namespace

void validate(const PipelineConfig& c) {
  in_stage("config", [&] {
    auto positive = [](std::string_view key, double v) {
      if (!(v > 0.0)) throw Error(ErrorCode::Config, fmt::format("{} must be positive", key));
    };
    positive("amount_threshold", c.amount_threshold);
    positive("share_threshold", c.share_threshold);
    positive("robust_amount_threshold", c.robust_amount_threshold);
    positive("tier_large", c.tier_large);
    positive("tier_mid", c.tier_mid);
    if (c.tier_mid > c.tier_large) throw Error(ErrorCode::Config, "tier_mid exceeds tier_large");
    if (c.baseline_window < 1) throw Error(ErrorCode::Config, "baseline_window must be >= 1");
    if (c.min_window < 1 || c.min_window > c.baseline_window) {
      throw Error(ErrorCode::Config, "min_window must lie in [1, baseline_window]");
    }
    if (c.regime_window < 1) throw Error(ErrorCode::Config, "regime_window must be >= 1");
    if (c.max_empty_slot_fraction < 0.0 || c.max_empty_slot_fraction > 1.0) {
      throw Error(ErrorCode::Config, "max_empty_slot_fraction must lie in [0, 1]");
    }
    if (c.lm_lags < 1) throw Error(ErrorCode::Config, "lm_lags must be >= 1");
  });
  require_inputs("ingest", c);
  require_inputs("sentiment", c);
  require_inputs("regimes", c);
}

std::vector<ManifestRow> read_manifest(const fs::path& path) {
  std::vector<ManifestRow> rows;
  const auto content = tsv::read_file(path);
  tsv::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (line_no == 1) {
      if (line != kManifestHeader) throw Error(ErrorCode::Format, path.string() + ": bad header");
      return;
    }
    if (line.empty()) return;
    const auto f = tsv::split(line);
    if (f.size() != 4) throw Error(ErrorCode::Format, fmt::format("{}:{}: bad row", path.string(), line_no));
    ManifestRow r{std::string(f[0]), as_count("rows_in", f[1]), as_count("rows_accepted", f[2]),
                  as_count("rows_rejected", f[3])};
    rows.push_back(std::move(r));
  });
  return rows;
}

void write_manifest(const fs::path& path, std::span<const ManifestRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << kManifestHeader << '\n';
  for (const auto& r : rows) {
    out << r.stage << '\t' << r.rows_in << '\t' << r.rows_accepted << '\t' << r.rows_rejected << '\n';
  }
}

DescriptiveStats describe(std::string_view variable, std::span<const double> column) {
  if (column.empty()) {
    throw Error(ErrorCode::EmptySample, fmt::format("no values for {}", variable));
  }
  DescriptiveStats s;
  s.variable = std::string(variable);
  s.n = column.size();
  const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
  s.min = *lo;
  s.max = *hi;
  double sum = 0.0;
  for (double v : column) sum += v;
  s.mean = std::clamp(sum / static_cast<double>(s.n), s.min, s.max);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : column) ss += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

std::vector<DescriptiveStats> describe_panel(std::span<const econometrics::PanelRow> panel) {
  using econometrics::EtColumn;
  std::vector<std::pair<std::string_view, std::vector<double>>> columns = {
      {"sentiment_lag1", {}}, {"et_all", {}}, {"et_inst", {}}, {"et_retail", {}},
      {"pb", {}}, {"market_risk_premium", {}}, {"market_return", {}}};
  for (const auto& r : panel) {
    if (r.sentiment_lag[0]) columns[0].second.push_back(*r.sentiment_lag[0]);
    if (auto v = r.et_of(EtColumn::All)) columns[1].second.push_back(*v);
    if (auto v = r.et_of(EtColumn::Institutional)) columns[2].second.push_back(*v);
    if (auto v = r.et_of(EtColumn::Retail)) columns[3].second.push_back(*v);
    if (r.controls) {
      columns[4].second.push_back(r.controls->pb);
      columns[5].second.push_back(r.controls->market_risk_premium);
      columns[6].second.push_back(r.controls->market_return);
    }
  }
  std::vector<DescriptiveStats> out;
  for (const auto& [name, values] : columns) {
    if (!values.empty()) out.push_back(describe(name, values));
  }
  return out;
}

void write_descriptive(const fs::path& path, std::span<const DescriptiveStats> stats) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "variable\tn\tmean\tstd\tmax\tmin\n";
  for (const auto& s : stats) {
    out << s.variable << '\t' << s.n << '\t' << tsv::fixed6(s.mean) << '\t' << tsv::fixed6(s.std_dev)
        << '\t' << tsv::fixed6(s.max) << '\t' << tsv::fixed6(s.min) << '\n';
  }
}

namespace {

std::size_t stage_rank(std::string_view name) {
  const auto prefix = name.substr(0, name.find('.'));
  for (std::size_t i = 0; i < std::size(kStages); ++i) {
    if (kStages[i] == prefix) return i;
  }
  return std::size(kStages);
}

// Replaces the rows of `stage` in the output directory's manifest.
void record(const PipelineConfig& c, std::string_view stage, std::vector<ManifestRow> rows) {
  const auto path = c.out_dir / "manifest.tsv";
  std::vector<ManifestRow> all;
  if (fs::exists(path)) {
    for (auto& r : read_manifest(path)) {
      if (r.stage.substr(0, r.stage.find('.')) != stage) all.push_back(std::move(r));
    }
  }
  for (auto& r : rows) all.push_back(std::move(r));
  std::stable_sort(all.begin(), all.end(), [](const ManifestRow& a, const ManifestRow& b) {
    return stage_rank(a.stage) < stage_rank(b.stage);
  });
  write_manifest(path, all);
}

ManifestRow count_row(std::string stage, std::size_t in, std::size_t accepted) {
  return {std::move(stage), in, accepted, in - accepted};
}

fs::path artifact(const PipelineConfig& c, std::string_view name) { return c.out_dir / name; }

std::set<std::string> kept_stocks(const PipelineConfig& c) {
  std::set<std::string> kept;
  const auto path = artifact(c, "stocks.tsv");
  const auto content = tsv::read_file(path);
  tsv::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (line_no == 1 || line.empty()) return;
    const auto f = tsv::split(line);
    if (f.size() != 2) throw Error(ErrorCode::Format, fmt::format("{}:{}: bad row", path.string(), line_no));
    if (f[1] == "kept") kept.emplace(f[0]);
  });
  return kept;
}

econometrics::RegimeMap load_regimes(const PipelineConfig& c) {
  econometrics::RegimeMap map;
  for (std::string_view ex : {"SH", "SZ"}) {
    map.emplace(std::string(ex), regimes::read_phases(artifact(c, fmt::format("phases_{}.tsv", ex))));
  }
  return map;
}

}  // namespace

void run_ingest(const PipelineConfig& c) {
  require_inputs("ingest", c);
  in_stage("ingest", [&] {
    fs::create_directories(c.out_dir);
    const auto calendar = load_calendar(c.calendar);
    auto posts = ingest::load_posts(c.posts, calendar);
    auto trades = ingest::load_trades(c.trades, calendar);
    const auto shares = ingest::load_shares(c.shares);
    const auto fundamentals = ingest::load_fundamentals(c.fundamentals);
    std::optional<ingest::LoadResult<ingest::MembershipEvent>> membership;
    if (c.membership) membership = ingest::load_membership(*c.membership);

    std::vector<ingest::Rejection> rejections;
    auto collect = [&](const auto& result) {
      rejections.insert(rejections.end(), result.rejections.begin(), result.rejections.end());
    };
    collect(posts);
    collect(trades);
    collect(shares);
    collect(fundamentals);
    if (membership) collect(*membership);

    const std::size_t posts_parsed = posts.rows.size();
    const std::set<std::string> bots(c.bot_ids.begin(), c.bot_ids.end());
    auto human_posts = ingest::filter_bot_posts(std::move(posts.rows), bots);

    std::map<std::string, std::size_t> occupied;
    std::map<std::string, std::set<Date>> active;
    for (const auto& p : human_posts) occupied.emplace(p.stock_id, 0);
    for (const auto& t : trades.rows) occupied.emplace(t.stock_id, 0);
    for (const auto& [stock, n] : occupied) active.emplace(stock, std::set<Date>{});
    for (const auto& [stock, n] : ingest::occupied_slot_counts(human_posts)) occupied[stock] = n;
    for (auto& [stock, days] : ingest::active_trading_days(trades.rows)) active[stock] = std::move(days);

    const auto dense = ingest::filter_sparse_stocks(occupied, calendar.size() * std::size(kAllSlots),
                                                    c.max_empty_slot_fraction);
    const auto trading = ingest::filter_suspended_stocks(active, calendar, c.max_suspension_days);
    std::set<std::string> churn;
    if (c.index_churn_filter && membership) {
      churn = ingest::index_churn_stocks(membership->rows, c.max_index_changes);
    }

    std::set<std::string> kept;
    std::ofstream stocks_out(artifact(c, "stocks.tsv"), std::ios::binary);
    if (!stocks_out) throw Error(ErrorCode::Io, "cannot write stocks.tsv");
    stocks_out << "stock_id\tstatus\n";
    for (const auto& [stock, n] : occupied) {
      std::string_view status = "kept";
      if (!dense.contains(stock)) status = "sparse";
      else if (!trading.contains(stock)) status = "suspended";
      else if (churn.contains(stock)) status = "index-churn";
      if (status == "kept") kept.insert(stock);
      stocks_out << stock << '\t' << status << '\n';
    }
    stocks_out.close();

    const std::size_t human_count = human_posts.size();
    const std::size_t trades_parsed = trades.rows.size();
    const auto clean_posts = ingest::keep_stocks(std::move(human_posts), kept);
    const auto clean_trades = ingest::keep_stocks(std::move(trades.rows), kept);
    ingest::write_posts(artifact(c, "posts_clean.tsv"), clean_posts);
    ingest::write_trades(artifact(c, "trades_clean.tsv"), clean_trades);
    ingest::write_rejections(artifact(c, "rejections.tsv"), rejections);

    std::vector<ManifestRow> rows = {
        count_row("ingest.posts", posts.rows_read, posts_parsed),
        count_row("ingest.trades", trades.rows_read, trades_parsed),
        count_row("ingest.shares", shares.rows_read, shares.rows.size()),
        count_row("ingest.fundamentals", fundamentals.rows_read, fundamentals.rows.size()),
    };
    if (membership) rows.push_back(count_row("ingest.membership", membership->rows_read, membership->rows.size()));
    rows.push_back(count_row("ingest.bot_filter", posts_parsed, human_count));
    rows.push_back(count_row("ingest.stock_filter", occupied.size(), kept.size()));
    rows.push_back(count_row("ingest.stock_filter_posts", human_count, clean_posts.size()));
    rows.push_back(count_row("ingest.stock_filter_trades", trades_parsed, clean_trades.size()));
    record(c, "ingest", std::move(rows));
  });
}

void run_sentiment(const PipelineConfig& c) {
  require_inputs("sentiment", c);
  in_stage("sentiment", [&] {
    const auto calendar = load_calendar(c.calendar);
    lexicon::LoadLog log;
    const auto lex = lexicon::load_lexicon(c.lexicon, c.negations, c.conflict_policy, &log);
    const auto posts = ingest::load_posts(artifact(c, "posts_clean.tsv"), calendar);
    if (!posts.rejections.empty()) {
      throw Error(ErrorCode::DataIntegrity, "posts_clean.tsv holds rows that no longer parse");
    }
    const auto built = sentiment::build_index(posts.rows, lex, c.threads);
    sentiment::write_index(artifact(c, "sentiment_index.tsv"), built.index);

    std::vector<std::string> texts;
    texts.reserve(posts.rows.size());
    for (const auto& p : posts.rows) texts.push_back(p.text);
    const auto freq = lexicon::unmatched_frequency(texts, lex, c.frequency_threshold);
    lexicon::write_frequency_report(artifact(c, "frequency_report.tsv"), freq);
    lexicon::write_conflicts(artifact(c, "lexicon_conflicts.tsv"), log.conflicts);

    std::vector<ManifestRow> rows = {count_row("sentiment.posts", built.posts_in, built.posts_scored)};
    if (c.accuracy_fixture) {
      const auto labeled = sentiment::load_accuracy_fixture(*c.accuracy_fixture);
      std::vector<std::optional<sentiment::PostSignal>> predictions;
      std::vector<sentiment::SignLabel> labels;
      for (const auto& l : labeled) {
        predictions.push_back(sentiment::score_text(l.text, lex));
        labels.push_back(l.label);
      }
      const double accuracy = sentiment::evaluate_accuracy(predictions, labels);
      std::ofstream out(artifact(c, "accuracy.tsv"), std::ios::binary);
      out << "posts\taccuracy\n" << labeled.size() << '\t' << tsv::fixed6(accuracy) << '\n';
      if (!out) throw Error(ErrorCode::Io, "cannot write accuracy.tsv");
    }
    record(c, "sentiment", std::move(rows));
  });
}

void run_metrics(const PipelineConfig& c) {
  require_inputs("ingest", c);
  in_stage("metrics", [&] {
    const auto calendar = load_calendar(c.calendar);
    const auto trades = ingest::load_trades(artifact(c, "trades_clean.tsv"), calendar);
    const auto stocks = kept_stocks(c);
    const auto shares = ingest::load_shares(c.shares);
    const microstructure::SharesTable table(shares.rows);
    const auto metrics =
        microstructure::compute_metrics(trades.rows, stocks, calendar, table, c.metrics_config(), c.threads);
    microstructure::write_metrics(artifact(c, "metrics.tsv"), metrics);

    std::size_t ticks_used = 0;
    for (const auto& t : trades.rows) ticks_used += stocks.contains(t.stock_id) ? 1 : 0;
    std::size_t with_et = 0;
    for (const auto& m : metrics) with_et += m.et_total ? 1 : 0;
    record(c, "metrics", {count_row("metrics.ticks", trades.rows_read, ticks_used),
                          count_row("metrics.slots", metrics.size(), with_et)});
  });
}

void run_regimes(const PipelineConfig& c) {
  require_inputs("regimes", c);
  in_stage("regimes", [&] {
    fs::create_directories(c.out_dir);
    std::vector<ManifestRow> rows;
    for (const auto& [ex, path] : {std::pair{"SH", c.index_sh}, std::pair{"SZ", c.index_sz}}) {
      const auto series = regimes::load_index_series(path);
      const auto phases = regimes::date_regimes(series, c.regime_window, c.regime_min_phase);
      regimes::write_phases(artifact(c, fmt::format("phases_{}.tsv", ex)), phases);
      std::size_t covered = 0;
      for (const auto& p : phases) covered += p.last_index - p.first_index + 1;
      rows.push_back(count_row(fmt::format("regimes.{}", ex), series.size(), covered));
    }
    record(c, "regimes", std::move(rows));
  });
}

void run_panel(const PipelineConfig& c) {
  require_inputs("ingest", c);
  in_stage("panel", [&] {
    const auto index = sentiment::read_index(artifact(c, "sentiment_index.tsv"));
    const auto metrics = microstructure::read_metrics(artifact(c, "metrics.tsv"));
    const auto fundamentals = ingest::load_fundamentals(c.fundamentals);
    econometrics::PanelOptions options;
    options.sentiment = c.sentiment_measure;
    options.tiers = {c.tier_large, c.tier_mid};
    options.tier_eval_date = c.tier_eval_date;
    const auto panel =
        econometrics::build_panel(index, metrics, load_regimes(c), fundamentals.rows, options);
    econometrics::write_panel(artifact(c, "panel.tsv"), panel);

    std::size_t candidates = 0;
    for (const auto& m : metrics) candidates += m.slot.slot != Slot::S1 ? 1 : 0;
    record(c, "panel", {count_row("panel.rows", candidates, panel.size())});
  });
}

void run_regress(const PipelineConfig& c) {
  in_stage("regress", [&] {
    const auto panel = econometrics::read_panel(artifact(c, "panel.tsv"));
    const auto cells = econometrics::table_grid(c.tables);
    econometrics::RunOptions options;
    options.covariance = c.covariance;
    options.lm_lags = c.lm_lags;
    options.threads = c.threads;
    const auto reports = econometrics::run_table(panel, cells, options);
    econometrics::write_reports(artifact(c, "regressions.tsv"), reports);
    std::ofstream out(artifact(c, "tables.txt"), std::ios::binary);
    out << econometrics::format_tables(reports);
    if (!out) throw Error(ErrorCode::Io, "cannot write tables.txt");

    std::size_t sufficient = 0;
    for (const auto& r : reports) sufficient += r.sufficient ? 1 : 0;
    record(c, "regress", {count_row("regress.cells", reports.size(), sufficient)});
  });
}

void run_describe(const PipelineConfig& c) {
  in_stage("describe", [&] {
    const auto panel = econometrics::read_panel(artifact(c, "panel.tsv"));
    write_descriptive(artifact(c, "descriptive.tsv"), describe_panel(panel));
  });
}

void run_pipeline(const PipelineConfig& c) {
  validate(c);
  in_stage("config", [&] {
    fs::create_directories(c.out_dir);
    std::ofstream out(artifact(c, "effective_config.txt"), std::ios::binary);
    out << to_text(c, false);
    if (!out) throw Error(ErrorCode::Io, "cannot write effective_config.txt");
  });
  fs::remove(artifact(c, "manifest.tsv"));
  run_ingest(c);
  run_sentiment(c);
  run_metrics(c);
  run_regimes(c);
  run_panel(c);
  run_regress(c);
  run_describe(c);
}

}  // namespace overtrade::pipeline

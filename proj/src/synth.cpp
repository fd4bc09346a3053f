#include "overtrade/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include <fmt/format.h>

#include "overtrade/ingest.hpp"
#include "overtrade/lexicon.hpp"
#include "overtrade/sentiment.hpp"

#ifndef OVERTRADE_DATA_DIR
#define OVERTRADE_DATA_DIR "data"
#endif

namespace overtrade::synth {

std::vector<fs::path> bundled_lexicon() {
  const fs::path dir = fs::path(OVERTRADE_DATA_DIR) / "lexicon";
  return {dir / "forum.tsv", dir / "base.tsv"};
}

std::vector<fs::path> bundled_negations() {
  return {fs::path(OVERTRADE_DATA_DIR) / "lexicon" / "negations.txt"};
}

fs::path bundled_accuracy_fixture() { return fs::path(OVERTRADE_DATA_DIR) / "accuracy_fixture.tsv"; }

namespace {

constexpr std::string_view kSeparator = "，";
constexpr std::string_view kFillerCandidates[] = {"呵", "嗯", "哦", "啊", "嘿", "哈", "吧", "呢"};
constexpr double kInstTick = 1'000'000.0;
constexpr double kRetailTickCap = 180'000.0;
constexpr double kMinInstTick = 250'000.0;
constexpr double kBaseInstTurnover = 0.02;
constexpr double kBaseRetailTurnover = 0.005;
constexpr std::size_t kHaltStart = 100;
constexpr std::size_t kHaltDays = 45;

struct Vocabulary {
  std::vector<std::string> positive;
  std::vector<std::string> negative;
  std::vector<std::string> negations;
  std::vector<std::string> filler;
};

Vocabulary build_vocabulary(const lexicon::Lexicon& lex) {
  Vocabulary v;
  for (const auto& e : lex.sorted_entries()) {
    if (e.weight > 0) v.positive.push_back(e.word);
    if (e.weight < 0) v.negative.push_back(e.word);
  }
  v.negations = lex.sorted_negations();
  auto starts_any = [&](std::string_view c) {
    auto starts = [&](const std::string& w) { return w.starts_with(c); };
    const auto entries = lex.sorted_entries();
    return std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return starts(e.word); }) ||
           std::any_of(v.negations.begin(), v.negations.end(), starts);
  };
  for (auto c : kFillerCandidates) {
    if (!starts_any(c)) v.filler.emplace_back(c);
  }
  auto contains_separator = [](const std::string& w) { return w.find(kSeparator) != std::string::npos; };
  if (v.positive.empty() || v.negative.empty() || v.negations.empty() || v.filler.size() < 2 ||
      std::any_of(v.positive.begin(), v.positive.end(), contains_separator) ||
      std::any_of(v.negative.begin(), v.negative.end(), contains_separator)) {
    throw Error(ErrorCode::Config, "word lists cannot express the synthetic post templates");
  }
  return v;
}

using Rng = std::mt19937_64;

Rng stream(std::uint64_t seed, std::uint64_t salt, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t pick(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

double normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

bool chance(Rng& rng, double p) { return uniform(rng, 0.0, 1.0) < p; }

struct Draft {
  std::int32_t seconds = 0;
  std::string author;
  std::string text;
  std::optional<double> value;  // intended score; nullopt for filler-only posts
};

class PostWriter {
 public:
  PostWriter(const Vocabulary& vocab, Rng& rng) : vocab_(vocab), rng_(rng) {}

  // A post whose score is +1/-1, +1/3/-1/3 or 0 with the requested sign.
  Draft scored(bool positive) {
    const auto& same = positive ? vocab_.positive : vocab_.negative;
    const auto& other = positive ? vocab_.negative : vocab_.positive;
    std::vector<std::string> words;
    Draft d;
    const double u = uniform(rng_, 0.0, 1.0);
    if (u < 0.45) {
      words = {word(same)};
      d.value = positive ? 1.0 : -1.0;
    } else if (u < 0.65) {
      words = {word(vocab_.negations), word(other)};
      d.value = positive ? 1.0 : -1.0;
    } else if (u < 0.88) {
      words = {word(same), word(same), word(other)};
      std::shuffle(words.begin(), words.end(), rng_);
      d.value = positive ? 1.0 / 3.0 : -1.0 / 3.0;
    } else {
      words = {word(same), word(other)};
      d.value = 0.0;
    }
    if (chance(rng_, 0.5)) words.insert(words.begin(), filler());
    if (chance(rng_, 0.3)) words.push_back(filler());
    d.text = join(words);
    return d;
  }

  Draft filler_only() {
    Draft d;
    d.text = join({filler(), filler()});
    return d;
  }

 private:
  const std::string& word(const std::vector<std::string>& list) { return list[pick(rng_, list.size())]; }

  std::string filler() {
    std::string s;
    const std::size_t len = 1 + pick(rng_, 3);
    for (std::size_t i = 0; i < len; ++i) s += vocab_.filler[pick(rng_, vocab_.filler.size())];
    return s;
  }

  static std::string join(const std::vector<std::string>& parts) {
    return fmt::format("{}", fmt::join(parts, kSeparator));
  }

  const Vocabulary& vocab_;
  Rng& rng_;
};

std::int32_t random_second(Rng& rng, Slot slot) {
  const auto lo = slot_start(slot);
  const auto hi = slot_end(slot) - 1;
  return std::uniform_int_distribution<std::int32_t>(lo, hi)(rng);
}

std::string clock(std::int32_t seconds) {
  return fmt::format("{:02d}:{:02d}:{:02d}", seconds / 3600, (seconds / 60) % 60, seconds % 60);
}

enum class StockKind { Regular, Sparse, Halted };

struct StockPlan {
  std::string id;
  StockKind kind = StockKind::Regular;
  std::size_t ordinal = 0;
};

std::string stock_id(std::size_t i) {
  return i % 2 == 0 ? fmt::format("{:06d}.SH", 600000 + i) : fmt::format("{:06d}.SZ", 1 + i);
}

// Realized same-slot history of one turnover component.
class History {
 public:
  History(int window, int min_window) : window_(window), min_window_(min_window) {}

  std::optional<double> baseline() const {
    if (static_cast<int>(values_.size()) < min_window_) return std::nullopt;
    double sum = 0.0;
    for (double v : values_) sum += v;
    const double mean = sum / static_cast<double>(values_.size());
    if (!(mean > 0.0)) return std::nullopt;
    return mean;
  }

  void push(double v) {
    values_.push_front(v);
    if (static_cast<int>(values_.size()) > window_) values_.pop_back();
  }

 private:
  int window_;
  int min_window_;
  std::deque<double> values_;  // most recent first
};

struct Tick {
  std::int32_t seconds;
  std::int64_t cents;
  std::int64_t volume;
};

// Cuts `value` into ticks; returns the traded value actually realized.
double cut_ticks(Rng& rng, double value, bool institutional, double price, Slot slot,
                 std::vector<Tick>& out) {
  std::vector<double> amounts;
  if (institutional) {
    double left = std::max(value, kMinInstTick);
    while (left >= 2.0 * kInstTick) {
      const double a = uniform(rng, 1.0, 2.0) * kInstTick;
      amounts.push_back(a);
      left -= a;
    }
    if (left < kMinInstTick && !amounts.empty()) {
      amounts.back() += left;
    } else {
      amounts.push_back(left);
    }
  } else {
    double left = value;
    while (left > kRetailTickCap) {
      const double a = uniform(rng, 0.5, 1.0) * kRetailTickCap;
      amounts.push_back(a);
      left -= a;
    }
    amounts.push_back(left);
  }
  double realized = 0.0;
  for (double a : amounts) {
    const double quoted = std::max(3.0, price * (1.0 + uniform(rng, -0.002, 0.002)));
    const auto cents = static_cast<std::int64_t>(std::llround(quoted * 100.0));
    const double p = static_cast<double>(cents) / 100.0;
    const auto volume = std::llround(a / p);
    if (volume < 1) continue;
    out.push_back({random_second(rng, slot), cents, volume});
    realized += p * static_cast<double>(volume);
  }
  return realized;
}

struct StockOutput {
  std::string posts;
  std::string trades;
  std::size_t post_rows = 0;
  std::size_t trade_rows = 0;
  double shares = 0.0;
};

StockOutput generate_stock(const SynthConfig& cfg, const StockPlan& plan, const TradingCalendar& calendar,
                           const lexicon::Lexicon& lex, const Vocabulary& vocab) {
  Rng rng = stream(cfg.seed, 1, plan.ordinal);
  PostWriter writer(vocab, rng);
  StockOutput out;
  out.shares = std::round(uniform(rng, 0.5, 2.0) * 1e8);
  double price = uniform(rng, 5.0, 50.0);
  std::array<double, 4> base_inst{};
  std::array<double, 4> base_retail{};
  const double scale = uniform(rng, 0.7, 1.3);
  for (std::size_t h = 0; h < 4; ++h) {
    const double slot_factor = h == 0 ? 1.4 : 1.0;
    base_inst[h] = kBaseInstTurnover * scale * slot_factor;
    base_retail[h] = kBaseRetailTurnover * scale * slot_factor;
  }
  std::vector<History> inst(4, History(cfg.baseline_window, cfg.min_window));
  std::vector<History> retail(4, History(cfg.baseline_window, cfg.min_window));
  double mood = 0.0;

  for (std::size_t d = 0; d < calendar.size(); ++d) {
    const std::string date = calendar.days()[d].to_string();
    price = std::clamp(price * std::exp(0.01 * normal(rng)), 3.5, 200.0);
    const bool halted = plan.kind == StockKind::Halted && d >= kHaltStart && d < kHaltStart + kHaltDays;
    std::optional<double> previous_sentiment;

    for (Slot slot : kAllSlots) {
      const auto h = static_cast<std::size_t>(slot_index(slot) - 1);
      mood = 0.6 * mood + 0.8 * normal(rng);

      // posts
      std::vector<Draft> drafts;
      const bool posting = plan.kind != StockKind::Sparse || chance(rng, 0.5);
      if (posting) {
        const std::size_t scored = 1 + pick(rng, 5);
        const double p_positive = 1.0 / (1.0 + std::exp(-2.0 * mood));
        for (std::size_t i = 0; i < scored; ++i) drafts.push_back(writer.scored(chance(rng, p_positive)));
        if (chance(rng, 0.15)) drafts.push_back(writer.filler_only());
        for (auto& dr : drafts) {
          dr.seconds = random_second(rng, slot);
          dr.author = fmt::format("u{}", pick(rng, 100000));
        }
        std::stable_sort(drafts.begin(), drafts.end(),
                         [](const Draft& a, const Draft& b) { return a.seconds < b.seconds; });
      }
      double sum = 0.0;
      int count = 0;
      for (const auto& dr : drafts) {
        const auto signal = sentiment::score_text(dr.text, lex);
        if (signal.has_value() != dr.value.has_value() || (signal && signal->value != *dr.value)) {
          throw Error(ErrorCode::DataIntegrity, "synthetic post scored off its template: " + dr.text);
        }
        if (signal) {
          sum += signal->value;
          ++count;
        }
        out.posts += fmt::format("{}\t{} {}\t{}\t{}\n", plan.id, date, clock(dr.seconds), dr.author,
                                 tsv::escape(dr.text));
        ++out.post_rows;
      }
      if (cfg.cleaning_rows && chance(rng, 0.01)) {
        out.posts += fmt::format("{}\t{} {}\tAI Summary\t{}\n", plan.id, date,
                                 clock(random_second(rng, slot)), writer.scored(true).text);
        ++out.post_rows;
      }

      // trades
      std::vector<Tick> ticks;
      if (!halted) {
        auto target = [&](History& history, double base, double alpha, double beta) {
          const auto baseline = history.baseline();
          if (!baseline) return base * std::max(0.3, 1.0 + 0.2 * normal(rng));
          double et = cfg.noise * normal(rng);
          if (slot != Slot::S1 && previous_sentiment) et += alpha + beta * *previous_sentiment;
          return *baseline * (1.0 + std::max(et, -0.9));
        };
        const double t_inst = target(inst[h], base_inst[h], cfg.alpha_inst, cfg.beta_inst);
        const double t_retail = target(retail[h], base_retail[h], cfg.alpha_retail, cfg.beta_retail);
        const double v_inst = cut_ticks(rng, t_inst * out.shares, true, price, slot, ticks);
        const double v_retail = cut_ticks(rng, t_retail * out.shares, false, price, slot, ticks);
        inst[h].push(v_inst / out.shares);
        retail[h].push(v_retail / out.shares);
        std::stable_sort(ticks.begin(), ticks.end(),
                         [](const Tick& a, const Tick& b) { return a.seconds < b.seconds; });
      }
      for (const auto& t : ticks) {
        out.trades += fmt::format("{}\t{} {}\t{}.{:02d}\t{}\n", plan.id, date, clock(t.seconds),
                                  t.cents / 100, t.cents % 100, t.volume);
      }
      out.trade_rows += ticks.size();
      previous_sentiment = count > 0 ? std::optional<double>(sum / count) : std::nullopt;
    }

    if (cfg.cleaning_rows && chance(rng, 0.03)) {
      // one row for each rejection path of the posts loader
      const auto kind = pick(rng, 3);
      if (kind == 0) {
        out.posts += fmt::format("{}\t{} 12:{:02d}:00\tu1\t{}\n", plan.id, date, pick(rng, 60),
                                 writer.scored(true).text);
      } else if (kind == 1) {
        out.posts += fmt::format("{}\t{}T25:61\tu1\t{}\n", plan.id, date, writer.scored(false).text);
      } else {
        out.posts += fmt::format("{}\t{} 10:00:00\tu1\t \n", plan.id, date);
      }
      ++out.post_rows;
    }
  }
  return out;
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
}

}  // namespace

SynthSummary generate_synthetic(const SynthConfig& cfg, const fs::path& out_dir) {
  if (cfg.stocks == 0 || cfg.days < 4) throw Error(ErrorCode::Config, "synthetic sample is too small");
  if (!std::isfinite(cfg.beta_inst) || !std::isfinite(cfg.beta_retail) ||
      !std::isfinite(cfg.alpha_inst) || !std::isfinite(cfg.alpha_retail) || !(cfg.noise >= 0.0)) {
    throw Error(ErrorCode::Config, "planted coefficients must be finite and noise non-negative");
  }
  if (cfg.min_window < 1 || cfg.min_window > cfg.baseline_window) {
    throw Error(ErrorCode::Config, "min_window must lie in [1, baseline_window]");
  }
  const auto lexicon_files = cfg.lexicon.empty() ? bundled_lexicon() : cfg.lexicon;
  const auto negation_files = cfg.negations.empty() ? bundled_negations() : cfg.negations;
  const auto lex = lexicon::load_lexicon(lexicon_files, negation_files);
  const auto vocab = build_vocabulary(lex);

  fs::create_directories(out_dir / "lexicon");
  const auto calendar = weekday_calendar(cfg.start, cfg.days);
  write_calendar(out_dir / "calendar.tsv", calendar);

  std::vector<StockPlan> plans;
  for (std::size_t i = 0; i < cfg.stocks; ++i) plans.push_back({stock_id(i), StockKind::Regular, i});
  if (cfg.cleaning_rows) {
    plans.push_back({stock_id(cfg.stocks), StockKind::Sparse, cfg.stocks});
    if (cfg.days > kHaltStart + kHaltDays) {
      plans.push_back({stock_id(cfg.stocks + 1), StockKind::Halted, cfg.stocks + 1});
    }
  }

  std::vector<StockOutput> outputs(plans.size());
  parallel_for(plans.size(), cfg.threads,
               [&](std::size_t i) { outputs[i] = generate_stock(cfg, plans[i], calendar, lex, vocab); });

  SynthSummary summary;
  {
    std::ofstream posts(out_dir / "posts.tsv", std::ios::binary);
    std::ofstream trades(out_dir / "trades.tsv", std::ios::binary);
    posts << ingest::kPostsHeader << '\n';
    trades << ingest::kTradesHeader << '\n';
    for (const auto& o : outputs) {
      posts << o.posts;
      trades << o.trades;
      summary.posts += o.post_rows;
      summary.trades += o.trade_rows;
    }
    if (!posts || !trades) throw Error(ErrorCode::Io, "cannot write posts or trades");
  }

  std::string shares = fmt::format("{}\n", ingest::kSharesHeader);
  std::string membership = fmt::format("{}\n", ingest::kMembershipHeader);
  for (std::size_t i = 0; i < plans.size(); ++i) {
    shares += fmt::format("{}\t{}\t{}\n", plans[i].id, cfg.start.to_string(), tsv::full(outputs[i].shares));
    membership += fmt::format("{}\t{}\n", plans[i].id, cfg.start.to_string());
  }
  write_text(out_dir / "shares.tsv", shares);
  write_text(out_dir / "membership.tsv", membership);

  // market-wide daily series
  Rng market = stream(cfg.seed, 2, 0);
  std::vector<double> premium(calendar.size());
  std::vector<double> market_return(calendar.size());
  for (std::size_t d = 0; d < calendar.size(); ++d) {
    premium[d] = 0.05 + 0.01 * normal(market);
    market_return[d] = 0.012 * normal(market);
  }
  constexpr double kTierCaps[] = {1.5e11, 5e10, 5e9};
  std::string fundamentals = fmt::format("{}\n", ingest::kFundamentalsHeader);
  for (const auto& plan : plans) {
    Rng rng = stream(cfg.seed, 3, plan.ordinal);
    const double cap = kTierCaps[plan.ordinal % 3] * uniform(rng, 0.8, 1.2);
    double pb = uniform(rng, 0.8, 6.0);
    for (std::size_t d = 0; d < calendar.size(); ++d) {
      pb *= std::exp(0.01 * normal(rng));
      fundamentals += fmt::format("{}\t{}\t{:.4f}\t{:.6f}\t{:.6f}\t{:.0f}\n", plan.id,
                                  calendar.days()[d].to_string(), pb, premium[d], market_return[d],
                                  cap * (1.0 + 0.01 * std::sin(static_cast<double>(d))));
    }
  }
  write_text(out_dir / "fundamentals.tsv", fundamentals);

  const double peak = static_cast<double>(cfg.days - 1) / 2.0;
  std::string sh = "date\tlevel\n";
  std::string sz = "date\tlevel\n";
  for (std::size_t d = 0; d < calendar.size(); ++d) {
    const double tent = 1.0 - std::abs(static_cast<double>(d) - peak) / peak;
    sh += fmt::format("{}\t{:.2f}\n", calendar.days()[d].to_string(), 3000.0 + 1000.0 * tent + 3.0 * normal(market));
    sz += fmt::format("{}\t{:.2f}\n", calendar.days()[d].to_string(), 12000.0 - 3000.0 * tent + 10.0 * normal(market));
  }
  write_text(out_dir / "index_SH.tsv", sh);
  write_text(out_dir / "index_SZ.tsv", sz);

  std::vector<std::string> lexicon_names;
  for (std::size_t i = 0; i < lexicon_files.size(); ++i) {
    const auto name = fmt::format("lexicon/{}_{}", i, lexicon_files[i].filename().string());
    fs::copy_file(lexicon_files[i], out_dir / name, fs::copy_options::overwrite_existing);
    lexicon_names.push_back(name);
  }
  std::vector<std::string> negation_names;
  for (std::size_t i = 0; i < negation_files.size(); ++i) {
    const auto name = fmt::format("lexicon/neg{}_{}", i, negation_files[i].filename().string());
    fs::copy_file(negation_files[i], out_dir / name, fs::copy_options::overwrite_existing);
    negation_names.push_back(name);
  }
  std::string accuracy_line = "accuracy_fixture =\n";
  if (fs::exists(bundled_accuracy_fixture())) {
    fs::copy_file(bundled_accuracy_fixture(), out_dir / "accuracy_fixture.tsv",
                  fs::copy_options::overwrite_existing);
    accuracy_line = "accuracy_fixture = accuracy_fixture.tsv\n";
  }

  // The regime window shrinks for short samples so the tent's apex stays datable.
  const std::size_t regime_window = std::min<std::size_t>(105, (cfg.days - 1) / 2 - 1);
  std::string config = fmt::format(
      "# synthetic dataset, seed {}\n"
      "posts = posts.tsv\n"
      "trades = trades.tsv\n"
      "shares = shares.tsv\n"
      "fundamentals = fundamentals.tsv\n"
      "calendar = calendar.tsv\n"
      "index_sh = index_SH.tsv\n"
      "index_sz = index_SZ.tsv\n"
      "membership = membership.tsv\n"
      "{}"
      "lexicon = {}\n"
      "negations = {}\n"
      "baseline_window = {}\n"
      "min_window = {}\n"
      "regime_window = {}\n"
      "regime_min_phase = {}\n"
      "seed = {}\n"
      "out_dir = out\n",
      cfg.seed, accuracy_line, fmt::join(lexicon_names, ","), fmt::join(negation_names, ","),
      cfg.baseline_window, cfg.min_window, regime_window, regime_window, cfg.seed);
  summary.config = out_dir / "config.txt";
  write_text(summary.config, config);
  return summary;
}

}  // namespace overtrade::synth

#include "overtrade/sentiment.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>

#include <fmt/format.h>

namespace overtrade::sentiment {

std::optional<PostSignal> score_post(std::span<const std::string_view> tokens,
                                     const lexicon::Lexicon& lexicon) {
  long weight_sum = 0;
  int weighted = 0;
  int negations = 0;
  for (auto token : tokens) {
    if (lexicon.is_negation(token)) {
      ++negations;
      continue;
    }
    const int w = lexicon.weight(token);
    if (w != 0) {
      weight_sum += w;
      ++weighted;
    }
  }
  if (weighted == 0) return std::nullopt;
  double value = static_cast<double>(weight_sum) / static_cast<double>(weighted);
  if (negations % 2 == 1) value = -value;
  return PostSignal{value, weighted, negations};
}

std::optional<PostSignal> score_text(std::string_view text, const lexicon::Lexicon& lexicon) {
  const auto tokens = lexicon::segment(text, lexicon);
  return score_post(tokens, lexicon);
}

std::optional<HourSentiment> aggregate_hour(std::span<const PostScore> scores) {
  if (scores.empty()) return std::nullopt;
  HourSentiment h;
  h.stock_id = scores.front().stock_id;
  h.slot = scores.front().slot;
  for (const auto& s : scores) {
    if (s.stock_id != h.stock_id || s.slot != h.slot) {
      throw Error(ErrorCode::InvalidArgument, "aggregate_hour: scores span several slots");
    }
    h.score_sum += s.signal.value;
  }
  h.post_count = static_cast<int>(scores.size());
  h.value = h.score_sum / static_cast<double>(h.post_count);
  return h;
}

std::optional<SignLabel> parse_sign_label(std::string_view text) {
  text = tsv::trim(text);
  if (text == "positive" || text == "+1" || text == "1") return SignLabel::Positive;
  if (text == "negative" || text == "-1") return SignLabel::Negative;
  if (text == "neutral" || text == "0") return SignLabel::Neutral;
  return std::nullopt;
}

SignLabel sign_of(const std::optional<PostSignal>& signal) {
  if (!signal || signal->value == 0.0) return SignLabel::Neutral;
  return signal->value > 0.0 ? SignLabel::Positive : SignLabel::Negative;
}

double evaluate_accuracy(std::span<const std::optional<PostSignal>> predictions,
                         std::span<const SignLabel> labels) {
  if (labels.empty()) throw Error(ErrorCode::InvalidArgument, "accuracy: no labels");
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::InvalidArgument, "accuracy: prediction/label count mismatch");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (sign_of(predictions[i]) == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

std::vector<LabeledPost> load_accuracy_fixture(const std::filesystem::path& path) {
  std::vector<LabeledPost> rows;
  const auto content = tsv::read_file(path);
  tsv::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (tsv::trim(line).empty() || line.front() == '#') return;
    if (line_no == 1 && line == "text\tlabel") return;
    const auto f = tsv::split(line);
    auto label = f.size() == 2 ? parse_sign_label(f[1]) : std::nullopt;
    if (!label) {
      throw Error(ErrorCode::Format, fmt::format("{}:{}: expected text<TAB>label",
                                                 path.string(), line_no));
    }
    rows.push_back({tsv::unescape(f[0]), *label});
  });
  return rows;
}

IndexBuild build_index(std::span<const ingest::Post> posts, const lexicon::Lexicon& lexicon,
                       unsigned threads) {
  IndexBuild out;
  out.posts_in = posts.size();

  // Group post positions by stock, keeping input order within each group.
  std::map<std::string_view, std::vector<std::size_t>> by_stock;
  for (std::size_t i = 0; i < posts.size(); ++i) by_stock[posts[i].stock_id].push_back(i);
  std::vector<const std::vector<std::size_t>*> groups;
  for (const auto& [_, idx] : by_stock) groups.push_back(&idx);

  std::vector<std::vector<HourSentiment>> per_stock(groups.size());
  std::vector<std::size_t> scored(groups.size(), 0);
  parallel_for(groups.size(), threads, [&](std::size_t g) {
    auto idx = *groups[g];
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return posts[a].posted_at < posts[b].posted_at;
    });
    std::vector<PostScore> bucket;
    auto flush = [&] {
      if (auto h = aggregate_hour(bucket)) per_stock[g].push_back(std::move(*h));
      bucket.clear();
    };
    std::optional<SlotKey> current;
    for (std::size_t i : idx) {
      const auto& p = posts[i];
      const SlotKey key{p.posted_at.date, p.slot};
      if (current && *current != key) flush();
      current = key;
      if (auto signal = score_text(p.text, lexicon)) {
        bucket.push_back({p.stock_id, key, *signal});
        ++scored[g];
      }
    }
    flush();
  });
  for (auto& v : per_stock) {
    for (auto& h : v) out.index.push_back(std::move(h));
  }
  out.posts_scored = std::accumulate(scored.begin(), scored.end(), std::size_t{0});
  return out;
}

void write_index(const std::filesystem::path& path, std::span<const HourSentiment> index) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << kIndexHeader << '\n';
  for (const auto& h : index) {
    out << h.stock_id << '\t' << h.slot.date.to_string() << '\t' << to_string(h.slot.slot) << '\t'
        << tsv::full(h.value) << '\t' << h.post_count << '\t' << tsv::full(h.score_sum) << '\n';
  }
}

std::vector<HourSentiment> read_index(const std::filesystem::path& path) {
  std::vector<HourSentiment> rows;
  const auto content = tsv::read_file(path);
  tsv::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (line_no == 1) {
      if (line != kIndexHeader) throw Error(ErrorCode::Format, path.string() + ": bad header");
      return;
    }
    if (line.empty()) return;
    const auto f = tsv::split(line);
    auto fail = [&] {
      throw Error(ErrorCode::Format, fmt::format("{}:{}: bad index row", path.string(), line_no));
    };
    if (f.size() != 6) fail();
    auto date = Date::parse(f[1]);
    auto slot = parse_slot(f[2]);
    auto value = tsv::parse_double(f[3]);
    auto count = tsv::parse_int(f[4]);
    auto sum = tsv::parse_double(f[5]);
    if (!date || !slot || !value || !count || !sum) fail();
    rows.push_back({std::string(f[0]), SlotKey{*date, *slot}, *value, *sum,
                    static_cast<int>(*count)});
  });
  return rows;
}

}  // namespace overtrade::sentiment

#include <doctest.h>

#include <algorithm>
#include <random>

#include <fmt/format.h>

#include "overtrade/common.hpp"
#include "overtrade/lexicon.hpp"
#include "overtrade/sentiment.hpp"
#include "test_support.hpp"

using namespace overtrade;
using namespace overtrade::sentiment;

namespace {

lexicon::Lexicon make_lexicon() {
  auto dict = lexicon::parse_dictionary("涨\t1\n好\t1\n跌\t-1\n差\t-1\n平\t0\n", "t", nullptr);
  return lexicon::Lexicon(dict, {"不", "没"});
}

lexicon::Lexicon bundled() {
  auto dir = testing::data_dir() / "lexicon";
  std::vector<std::filesystem::path> dicts = {dir / "forum.tsv", dir / "base.tsv"};
  std::vector<std::filesystem::path> negs = {dir / "negations.txt"};
  return lexicon::load_lexicon(dicts, negs);
}

std::optional<PostSignal> score_tokens(std::vector<std::string_view> tokens) {
  static const auto lex = make_lexicon();
  return score_post(tokens, lex);
}

PostScore at(double value, SlotKey key = {}) {
  return {"A", key, PostSignal{value, 1, 0}};
}

}  // namespace

TEST_CASE("post score examples") {
  auto s = score_tokens({"涨", "好"});
  REQUIRE(s);
  CHECK(s->value == 1.0);
  CHECK(s->sentiment_words == 2);
  s = score_tokens({"不", "涨"});
  REQUIRE(s);
  CHECK(s->value == -1.0);
  s = score_tokens({"涨", "跌", "跌"});
  REQUIRE(s);
  CHECK(s->value == -1.0 / 3.0);
  s = score_tokens({"不", "没", "跌"});
  REQUIRE(s);
  CHECK(s->value == -1.0);
  CHECK(s->negations == 2);
  CHECK_FALSE(score_tokens({"平", "x"}));
  CHECK_FALSE(score_tokens({}));
  CHECK_FALSE(score_tokens({"不"}));
}

TEST_CASE("negation flips the sign once per negation word") {
  std::mt19937_64 rng(23);
  const std::vector<std::string_view> vocab = {"涨", "好", "跌", "差", "平", "x"};
  for (int trial = 0; trial < 5000; ++trial) {
    std::vector<std::string_view> tokens;
    auto n = 1 + rng() % 8;
    for (std::size_t i = 0; i < n; ++i) tokens.push_back(vocab[rng() % vocab.size()]);
    auto base = score_tokens(tokens);
    auto with_negation = tokens;
    with_negation.insert(with_negation.begin() + static_cast<long>(rng() % (tokens.size() + 1)), "不");
    auto flipped = score_tokens(with_negation);
    REQUIRE(base.has_value() == flipped.has_value());
    if (!base) continue;
    CHECK(flipped->value == -base->value);
    CHECK(std::abs(base->value) <= 1.0);
    auto shuffled = tokens;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(score_tokens(shuffled)->value == base->value);
  }
}

TEST_CASE("hour aggregation examples") {
  std::vector<PostScore> scores = {at(1.0), at(-1.0 / 3.0), at(0.0)};
  auto hour = aggregate_hour(scores);
  REQUIRE(hour);
  CHECK(hour->value == doctest::Approx(2.0 / 9.0).epsilon(1e-15));
  CHECK(hour->score_sum == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(hour->post_count == 3);
  CHECK_FALSE(aggregate_hour({}));
}

TEST_CASE("hour value stays within bounds") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<PostScore> scores;
    auto n = 1 + rng() % 10;
    for (std::size_t i = 0; i < n; ++i) scores.push_back(at(u(rng)));
    auto hour = aggregate_hour(scores);
    REQUIRE(hour);
    CHECK(std::abs(hour->value) <= 1.0);
  }
}

TEST_CASE("accuracy examples") {
  std::vector<std::optional<PostSignal>> predictions = {
      PostSignal{1.0, 1, 0}, PostSignal{-1.0, 1, 0}, std::nullopt, PostSignal{0.5, 2, 0}};
  std::vector<SignLabel> labels = {SignLabel::Positive, SignLabel::Negative, SignLabel::Neutral,
                                   SignLabel::Negative};
  CHECK(evaluate_accuracy(predictions, labels) == 0.75);
  CHECK(sign_of(PostSignal{0.0, 2, 0}) == SignLabel::Neutral);
  CHECK_THROWS_AS(evaluate_accuracy({}, {}), Error);
  CHECK_THROWS_AS(evaluate_accuracy(predictions, std::span(labels).first(2)), Error);
}

TEST_CASE("hand-scored fixture posts match exactly") {
  const auto lex = bundled();
  const auto content = tsv::read_file(testing::fixture_dir() / "scored_posts.tsv");
  std::size_t rows = 0;
  tsv::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (line_no == 1 || line.empty()) return;
    const auto f = tsv::split(line);
    REQUIRE(f.size() == 4);
    ++rows;
    INFO("line " << line_no << ": " << std::string(f[0]));
    auto signal = score_text(f[0], lex);
    if (f[3] == "none") {
      CHECK_FALSE(signal);
      return;
    }
    REQUIRE(signal);
    const auto slash = f[3].find('/');
    const double p = static_cast<double>(*tsv::parse_int(f[3].substr(0, slash)));
    const double q = static_cast<double>(*tsv::parse_int(f[3].substr(slash + 1)));
    CHECK(signal->value == p / q);
    CHECK(signal->sentiment_words == *tsv::parse_int(f[1]));
    CHECK(signal->negations == *tsv::parse_int(f[2]));
  });
  CHECK(rows == 200);
}

TEST_CASE("index build groups by slot in posting order and ignores thread count") {
  const auto lex = make_lexicon();
  auto post = [](std::string stock, std::string_view ts, std::string text) {
    auto t = *Timestamp::parse(ts);
    return ingest::Post{std::move(stock), t, *assign_slot(t), "u", std::move(text), 0};
  };
  std::vector<ingest::Post> posts = {
      post("B", "2024-01-02 09:50", "涨"), post("A", "2024-01-02 10:40", "跌"),
      post("A", "2024-01-02 09:40", "涨好"), post("A", "2024-01-02 09:45", "不涨"),
      post("A", "2024-01-02 09:47", "平"), post("A", "2024-01-03 13:10", "差")};
  auto built = build_index(posts, lex, 1);
  CHECK(built.posts_in == 6);
  CHECK(built.posts_scored == 5);
  REQUIRE(built.index.size() == 4);
  CHECK(built.index[0].stock_id == "A");
  CHECK(built.index[0].slot.slot == Slot::S1);
  CHECK(built.index[0].value == 0.0);
  CHECK(built.index[0].post_count == 2);
  CHECK(built.index[1].slot.slot == Slot::S2);
  CHECK(built.index[2].slot.date == testing::ymd(2024, 1, 3));
  CHECK(built.index[3].stock_id == "B");

  std::mt19937_64 rng(2);
  std::vector<ingest::Post> many;
  const std::vector<std::string> texts = {"涨", "跌", "不好", "平", "好差涨", "x"};
  for (int i = 0; i < 3000; ++i) {
    auto stock = "S" + std::to_string(rng() % 17);
    auto ts = fmt::format("2024-01-0{} 1{}:{:02}", 2 + rng() % 3, 3 + rng() % 2, rng() % 60);
    many.push_back(post(stock, ts, texts[rng() % texts.size()]));
  }
  auto one = build_index(many, lex, 1);
  auto four = build_index(many, lex, 4);
  REQUIRE(one.index.size() == four.index.size());
  for (std::size_t i = 0; i < one.index.size(); ++i) {
    CHECK(one.index[i].stock_id == four.index[i].stock_id);
    CHECK(one.index[i].slot == four.index[i].slot);
    CHECK(one.index[i].value == four.index[i].value);
  }
}

TEST_CASE("index files round trip") {
  testing::TempDir dir;
  std::vector<HourSentiment> index = {
      {"A", {testing::ymd(2024, 1, 2), Slot::S1}, 1.0 / 3.0, 2.0 / 3.0, 2},
      {"B", {testing::ymd(2024, 1, 3), Slot::S4}, -0.1, -0.1, 1}};
  write_index(dir / "i.tsv", index);
  auto back = read_index(dir / "i.tsv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].value == index[0].value);
  CHECK(back[0].score_sum == index[0].score_sum);
  CHECK(back[1].slot == index[1].slot);
  CHECK(back[1].post_count == 1);
}

TEST_CASE("bundled accuracy fixture loads and mostly agrees with the lexicon") {
  const auto lex = bundled();
  const auto rows = load_accuracy_fixture(testing::data_dir() / "accuracy_fixture.tsv");
  REQUIRE(rows.size() == 30);
  std::vector<std::optional<PostSignal>> predictions;
  std::vector<SignLabel> labels;
  for (const auto& r : rows) {
    predictions.push_back(score_text(r.text, lex));
    labels.push_back(r.label);
  }
  const double accuracy = evaluate_accuracy(predictions, labels);
  CHECK(accuracy > 0.5);
  CHECK(accuracy < 1.0);  // "非常看好" is scored as negated on purpose
}

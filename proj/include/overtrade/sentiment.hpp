#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "overtrade/common.hpp"
#include "overtrade/ingest.hpp"
#include "overtrade/lexicon.hpp"

namespace overtrade::sentiment {

// Score of one post: mean weight of its sentiment-bearing tokens, sign-flipped
// once per negation token.
struct PostSignal {
  double value = 0.0;
  int sentiment_words = 0;  // tokens with nonzero weight, >= 1
  int negations = 0;
};

struct PostScore {
  std::string stock_id;
  SlotKey slot;
  PostSignal signal;
};

struct HourSentiment {
  std::string stock_id;
  SlotKey slot;
  double value = 0.0;      // mean of post values
  double score_sum = 0.0;  // unnormalized sum of post values
  int post_count = 0;
};

// nullopt when the post has no sentiment-bearing token.
std::optional<PostSignal> score_post(std::span<const std::string_view> tokens,
                                     const lexicon::Lexicon& lexicon);
std::optional<PostSignal> score_text(std::string_view text, const lexicon::Lexicon& lexicon);

// Reduces in the given order. All scores must share (stock, slot); nullopt for
// an empty input.
std::optional<HourSentiment> aggregate_hour(std::span<const PostScore> scores);

enum class SignLabel { Positive, Negative, Neutral };
std::optional<SignLabel> parse_sign_label(std::string_view text);
SignLabel sign_of(const std::optional<PostSignal>& signal);

// Fraction of predictions whose sign class equals the label; no-signal counts
// as neutral. Throws Error(InvalidArgument) for empty or mismatched inputs.
double evaluate_accuracy(std::span<const std::optional<PostSignal>> predictions,
                         std::span<const SignLabel> labels);

struct LabeledPost {
  std::string text;
  SignLabel label = SignLabel::Neutral;
};
std::vector<LabeledPost> load_accuracy_fixture(const std::filesystem::path& path);

struct IndexBuild {
  std::vector<HourSentiment> index;  // sorted by (stock, date, slot)
  std::size_t posts_in = 0;
  std::size_t posts_scored = 0;
};

// Scores every post and reduces per (stock, slot) in ascending posting time
// (ties keep input order). Output is independent of `threads`.
IndexBuild build_index(std::span<const ingest::Post> posts, const lexicon::Lexicon& lexicon,
                       unsigned threads = 1);

inline constexpr std::string_view kIndexHeader =
    "stock_id\tdate\tslot\tvalue\tpost_count\tscore_sum";
void write_index(const std::filesystem::path& path, std::span<const HourSentiment> index);
std::vector<HourSentiment> read_index(const std::filesystem::path& path);

}  // namespace overtrade::sentiment

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace overtrade::lexicon {

enum class ConflictPolicy {
  FirstWins,  // highest-priority (first listed) source decides
  SumSign,    // sign of the summed weights across sources
};

std::optional<ConflictPolicy> parse_conflict_policy(std::string_view text);
std::string_view to_string(ConflictPolicy policy);

struct LexiconEntry {
  std::string word;
  int weight = 0;  // -1, 0 or +1
  std::string source;
};

struct Conflict {
  std::string word;
  std::string kept_source;
  int kept_weight = 0;
  std::string other_source;
  int other_weight = 0;
};

struct LineReject {
  std::string source;
  std::size_t line = 0;
  std::string reason;
};

struct LoadLog {
  std::vector<Conflict> conflicts;
  std::vector<LineReject> rejects;
};

// Weighted words of one or more merged sources. `votes` carries the running
// weight sum so that SumSign merges stay associative.
struct Dictionary {
  struct Item {
    int weight = 0;
    long votes = 0;
    std::string source;
    bool operator==(const Item&) const = default;
  };
  std::map<std::string, Item, std::less<>> items;

  bool operator==(const Dictionary&) const = default;
};

Dictionary parse_dictionary(std::string_view content, const std::string& source, LoadLog* log);
Dictionary read_dictionary(const std::filesystem::path& path, LoadLog* log);
std::set<std::string> parse_negations(std::string_view content, const std::string& source,
                                      LoadLog* log);

// `higher` takes priority over `lower`.
Dictionary merge(const Dictionary& higher, const Dictionary& lower, ConflictPolicy policy,
                 std::vector<Conflict>* conflicts = nullptr);

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

class Lexicon {
 public:
  // Words listed both as negations and weighted words are kept as negations;
  // each such overlap is reported in `conflicts`. Throws Error(EmptyLexicon)
  // when no weighted word remains.
  Lexicon(const Dictionary& dictionary, const std::set<std::string>& negations,
          std::vector<Conflict>* conflicts = nullptr);

  const LexiconEntry* find(std::string_view word) const;
  int weight(std::string_view word) const;  // 0 when absent
  bool is_negation(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word) || is_negation(word); }

  std::size_t max_word_length() const { return max_word_length_; }
  std::size_t positive_count() const { return positive_; }
  std::size_t negative_count() const { return negative_; }
  std::size_t neutral_count() const { return neutral_; }
  std::size_t negation_count() const { return negations_.size(); }

  std::vector<LexiconEntry> sorted_entries() const;
  std::vector<std::string> sorted_negations() const;

 private:
  std::unordered_map<std::string, LexiconEntry, StringHash, std::equal_to<>> entries_;
  std::unordered_set<std::string, StringHash, std::equal_to<>> negations_;
  std::size_t max_word_length_ = 0;
  std::size_t positive_ = 0;
  std::size_t negative_ = 0;
  std::size_t neutral_ = 0;
};

// Dictionaries are merged in priority order (first = highest).
Lexicon load_lexicon(std::span<const std::filesystem::path> dictionaries,
                     std::span<const std::filesystem::path> negation_files,
                     ConflictPolicy policy = ConflictPolicy::FirstWins, LoadLog* log = nullptr);

// Byte length of the UTF-8 character starting at `pos`; a byte that does not
// begin a well-formed sequence counts as a one-byte character.
std::size_t utf8_char_length(std::string_view text, std::size_t pos);
std::size_t utf8_length(std::string_view text);

// Greedy forward maximum matching against sentiment and negation words. The
// returned views point into `text` and concatenate back to it exactly.
std::vector<std::string_view> segment(std::string_view text, const Lexicon& lexicon);

struct FrequencyRow {
  std::string token;
  std::size_t count = 0;
};

// Tokens not found in the lexicon with count >= threshold, by descending count
// then token. Feeds manual labeling; nothing is added to the lexicon.
std::vector<FrequencyRow> unmatched_frequency(std::span<const std::string> texts,
                                              const Lexicon& lexicon, std::size_t threshold);
void write_frequency_report(const std::filesystem::path& path,
                            std::span<const FrequencyRow> rows);
void write_conflicts(const std::filesystem::path& path, std::span<const Conflict> conflicts);

}  // namespace overtrade::lexicon

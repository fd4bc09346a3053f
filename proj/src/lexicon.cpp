#include "overtrade/lexicon.hpp"

#include <algorithm>
#include <fstream>

#include "overtrade/common.hpp"

namespace overtrade::lexicon {

std::optional<ConflictPolicy> parse_conflict_policy(std::string_view text) {
  if (text == "first_wins") return ConflictPolicy::FirstWins;
  if (text == "sum_sign") return ConflictPolicy::SumSign;
  return std::nullopt;
}

std::string_view to_string(ConflictPolicy policy) {
  return policy == ConflictPolicy::FirstWins ? "first_wins" : "sum_sign";
}

namespace {

int sign(long v) { return (v > 0) - (v < 0); }

void add_item(Dictionary& dict, std::string word, int weight, const std::string& source,
              LoadLog* log) {
  auto [it, inserted] = dict.items.try_emplace(std::move(word), Dictionary::Item{weight, weight, source});
  if (!inserted && it->second.weight != weight && log) {
    log->conflicts.push_back({it->first, it->second.source, it->second.weight, source, weight});
  }
}

}  // namespace

Dictionary parse_dictionary(std::string_view content, const std::string& source, LoadLog* log) {
  Dictionary dict;
  tsv::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (tsv::trim(line).empty() || line.front() == '#') return;
    auto reject = [&](std::string reason) {
      if (log) log->rejects.push_back({source, line_no, std::move(reason)});
    };
    const auto fields = tsv::split(line);
    if (fields.size() != 2) return reject("malformed-row");
    const auto word = tsv::trim(fields[0]);
    if (word.empty()) return reject("empty-word");
    const auto weight = tsv::parse_int(fields[1]);
    if (!weight || *weight < -1 || *weight > 1) return reject("bad-weight");
    add_item(dict, std::string(word), static_cast<int>(*weight), source, log);
  });
  return dict;
}

Dictionary read_dictionary(const std::filesystem::path& path, LoadLog* log) {
  return parse_dictionary(tsv::read_file(path), path.filename().string(), log);
}

std::set<std::string> parse_negations(std::string_view content, const std::string& source,
                                      LoadLog* log) {
  std::set<std::string> words;
  tsv::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    const auto word = tsv::trim(line);
    if (word.empty() || word.front() == '#') return;
    if (word.find('\t') != std::string_view::npos) {
      if (log) log->rejects.push_back({source, line_no, "malformed-row"});
      return;
    }
    words.emplace(word);
  });
  return words;
}

Dictionary merge(const Dictionary& higher, const Dictionary& lower, ConflictPolicy policy,
                 std::vector<Conflict>* conflicts) {
  Dictionary out = higher;
  for (const auto& [word, item] : lower.items) {
    auto it = out.items.find(word);
    if (it == out.items.end()) {
      out.items.emplace(word, item);
      continue;
    }
    auto& kept = it->second;
    const int before = kept.weight;
    if (policy == ConflictPolicy::SumSign) {
      kept.votes += item.votes;
      kept.weight = sign(kept.votes);
      kept.source += "+" + item.source;
    }
    if (conflicts && before != item.weight) {
      conflicts->push_back({word, kept.source, kept.weight, item.source, item.weight});
    }
  }
  return out;
}

Lexicon::Lexicon(const Dictionary& dictionary, const std::set<std::string>& negations,
                 std::vector<Conflict>* conflicts) {
  for (const auto& word : negations) {
    negations_.insert(word);
    max_word_length_ = std::max(max_word_length_, utf8_length(word));
  }
  for (const auto& [word, item] : dictionary.items) {
    if (negations_.contains(word)) {
      if (conflicts) conflicts->push_back({word, "negation", 0, item.source, item.weight});
      continue;
    }
    entries_.emplace(word, LexiconEntry{word, item.weight, item.source});
    max_word_length_ = std::max(max_word_length_, utf8_length(word));
    if (item.weight > 0) ++positive_;
    else if (item.weight < 0) ++negative_;
    else ++neutral_;
  }
  if (entries_.empty()) throw Error(ErrorCode::EmptyLexicon, "no sentiment words loaded");
}

const LexiconEntry* Lexicon::find(std::string_view word) const {
  auto it = entries_.find(word);
  return it == entries_.end() ? nullptr : &it->second;
}

int Lexicon::weight(std::string_view word) const {
  const auto* e = find(word);
  return e ? e->weight : 0;
}

bool Lexicon::is_negation(std::string_view word) const { return negations_.contains(word); }

std::vector<LexiconEntry> Lexicon::sorted_entries() const {
  std::vector<LexiconEntry> out;
  out.reserve(entries_.size());
  for (const auto& [_, e] : entries_) out.push_back(e);
  std::sort(out.begin(), out.end(),
            [](const LexiconEntry& a, const LexiconEntry& b) { return a.word < b.word; });
  return out;
}

std::vector<std::string> Lexicon::sorted_negations() const {
  std::vector<std::string> out(negations_.begin(), negations_.end());
  std::sort(out.begin(), out.end());
  return out;
}

Lexicon load_lexicon(std::span<const std::filesystem::path> dictionaries,
                     std::span<const std::filesystem::path> negation_files,
                     ConflictPolicy policy, LoadLog* log) {
  Dictionary merged;
  std::vector<Conflict>* conflicts = log ? &log->conflicts : nullptr;
  for (const auto& path : dictionaries) {
    merged = merge(merged, read_dictionary(path, log), policy, conflicts);
  }
  std::set<std::string> negations;
  for (const auto& path : negation_files) {
    auto words = parse_negations(tsv::read_file(path), path.filename().string(), log);
    negations.insert(words.begin(), words.end());
  }
  return Lexicon(merged, negations, conflicts);
}

std::size_t utf8_char_length(std::string_view text, std::size_t pos) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  std::size_t len = 0;
  if (lead < 0x80) return 1;
  if (lead >= 0xC2 && lead <= 0xDF) len = 2;
  else if (lead >= 0xE0 && lead <= 0xEF) len = 3;
  else if (lead >= 0xF0 && lead <= 0xF4) len = 4;
  else return 1;
  if (pos + len > text.size()) return 1;
  for (std::size_t i = 1; i < len; ++i) {
    const auto c = static_cast<unsigned char>(text[pos + i]);
    if ((c & 0xC0) != 0x80) return 1;
  }
  return len;
}

std::size_t utf8_length(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < text.size(); pos += utf8_char_length(text, pos)) ++n;
  return n;
}

std::vector<std::string_view> segment(std::string_view text, const Lexicon& lexicon) {
  std::vector<std::string_view> tokens;
  const std::size_t max_chars = std::max<std::size_t>(1, lexicon.max_word_length());
  std::vector<std::size_t> ends;
  ends.reserve(max_chars);
  std::size_t pos = 0;
  while (pos < text.size()) {
    ends.clear();
    for (std::size_t p = pos; ends.size() < max_chars && p < text.size();) {
      p += utf8_char_length(text, p);
      ends.push_back(p);
    }
    std::size_t end = ends.front();
    for (std::size_t j = ends.size(); j-- > 0;) {
      if (lexicon.contains(text.substr(pos, ends[j] - pos))) {
        end = ends[j];
        break;
      }
    }
    tokens.push_back(text.substr(pos, end - pos));
    pos = end;
  }
  return tokens;
}

std::vector<FrequencyRow> unmatched_frequency(std::span<const std::string> texts,
                                              const Lexicon& lexicon, std::size_t threshold) {
  std::map<std::string, std::size_t, std::less<>> counts;
  for (const auto& text : texts) {
    for (auto token : segment(text, lexicon)) {
      if (lexicon.contains(token) || tsv::trim(token).empty()) continue;
      auto it = counts.find(token);
      if (it == counts.end()) counts.emplace(std::string(token), 1);
      else ++it->second;
    }
  }
  std::vector<FrequencyRow> rows;
  for (auto& [token, count] : counts) {
    if (count >= threshold) rows.push_back({token, count});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const FrequencyRow& a, const FrequencyRow& b) { return a.count > b.count; });
  return rows;
}

void write_frequency_report(const std::filesystem::path& path,
                            std::span<const FrequencyRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "token\tcount\n";
  for (const auto& r : rows) out << tsv::escape(r.token) << '\t' << r.count << '\n';
}

void write_conflicts(const std::filesystem::path& path, std::span<const Conflict> conflicts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "word\tkept_source\tkept_weight\tother_source\tother_weight\n";
  for (const auto& c : conflicts) {
    out << c.word << '\t' << c.kept_source << '\t' << c.kept_weight << '\t' << c.other_source
        << '\t' << c.other_weight << '\n';
  }
}

}  // namespace overtrade::lexicon

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mglab/error.hpp"
#include "mglab/log.hpp"
#include "mglab/utf8.hpp"

namespace mglab {

using WordId = std::uint32_t;
using Count = std::uint64_t;

inline constexpr std::size_t kDefaultMaxVocab = 100000;

namespace detail {

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

constexpr bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

}  // namespace detail

// Splits on ASCII whitespace. Tokens are returned verbatim: no case folding,
// no punctuation handling.
inline std::vector<std::string_view> tokenize_view(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && detail::is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !detail::is_space(text[i])) ++i;
    if (i > start) tokens.push_back(text.substr(start, i - start));
  }
  return tokens;
}

inline std::vector<std::string> tokenize(std::string_view text) {
  utf8::validate(text);
  std::vector<std::string> out;
  for (auto t : tokenize_view(text)) out.emplace_back(t);
  return out;
}

// Token <-> id mapping. Ids are dense and ordered by descending count, ties
// in first-occurrence order. Immutable once built.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Entries must already be in id order; duplicates are rejected.
  static Vocabulary from_entries(std::vector<std::pair<std::string, Count>> entries) {
    Vocabulary v;
    v.words_.reserve(entries.size());
    v.counts_.reserve(entries.size());
    for (auto& [word, count] : entries) {
      if (v.index_.contains(word)) {
        throw ConfigError("duplicate vocabulary entry '" + word + "'");
      }
      v.index_.emplace(word, static_cast<WordId>(v.words_.size()));
      v.words_.push_back(std::move(word));
      v.counts_.push_back(count);
      v.total_tokens_ += count;
    }
    return v;
  }

  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }

  const std::string& word(WordId id) const { return words_.at(id); }
  Count count(WordId id) const { return counts_.at(id); }
  Count total_tokens() const noexcept { return total_tokens_; }

  std::span<const std::string> words() const noexcept { return words_; }
  std::span<const Count> counts() const noexcept { return counts_; }

  std::optional<WordId> find(std::string_view word) const {
    auto it = index_.find(word);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(std::string_view word) const { return index_.find(word) != index_.end(); }

  WordId id(std::string_view word) const {
    if (auto found = find(word)) return *found;
    throw LookupError("word not in vocabulary: '" + std::string(word) + "'");
  }

  // One `word<TAB>count` line per entry, in id order.
  void write_tsv(std::ostream& out) const {
    for (std::size_t i = 0; i < words_.size(); ++i) out << words_[i] << '\t' << counts_[i] << '\n';
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_ && a.counts_ == b.counts_;
  }

 private:
  std::vector<std::string> words_;
  std::vector<Count> counts_;
  std::unordered_map<std::string, WordId, detail::StringHash, std::equal_to<>> index_;
  Count total_tokens_ = 0;
};

struct CorpusStats {
  Count raw_token_count = 0;
  Count retained_token_count = 0;
  std::size_t distinct_before_cap = 0;
};

// Incremental counter behind build_vocab.
class VocabBuilder {
 public:
  void add(std::string_view token) {
    ++raw_;
    auto it = slot_.find(token);
    if (it == slot_.end()) {
      slot_.emplace(std::string(token), entries_.size());
      entries_.emplace_back(std::string(token), 1);
    } else {
      ++entries_[it->second].second;
    }
  }

  Count raw_token_count() const noexcept { return raw_; }

  Vocabulary build(Count min_count, std::size_t max_vocab, CorpusStats* stats = nullptr) const {
    if (min_count < 1) throw ConfigError("min_count must be >= 1");
    if (max_vocab < 1) throw ConfigError("max_vocab must be >= 1");
    std::vector<std::pair<std::string, Count>> kept;
    for (const auto& e : entries_) {
      if (e.second >= min_count) kept.push_back(e);
    }
    const std::size_t distinct = kept.size();
    std::stable_sort(kept.begin(), kept.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (kept.size() > max_vocab) kept.resize(max_vocab);
    if (kept.empty() && raw_ > 0) warn("no token survived vocabulary filtering");
    auto vocab = Vocabulary::from_entries(std::move(kept));
    if (stats) {
      stats->raw_token_count = raw_;
      stats->retained_token_count = vocab.total_tokens();
      stats->distinct_before_cap = distinct;
    }
    return vocab;
  }

 private:
  std::vector<std::pair<std::string, Count>> entries_;
  std::unordered_map<std::string, std::size_t, detail::StringHash, std::equal_to<>> slot_;
  Count raw_ = 0;
};

template <typename Range>
Vocabulary build_vocab(const Range& tokens, Count min_count, std::size_t max_vocab = kDefaultMaxVocab,
                       CorpusStats* stats = nullptr) {
  VocabBuilder builder;
  for (const auto& t : tokens) builder.add(std::string_view(t));
  return builder.build(min_count, max_vocab, stats);
}

// Probability of keeping an occurrence of a word with relative frequency
// f = word_freq / total under threshold t: min(1, sqrt(t/f) + t/f).
inline double keep_probability(Count word_freq, Count total, double threshold) {
  if (word_freq == 0 || word_freq > total) throw ConfigError("keep_probability: need 0 < word_freq <= total");
  if (!(threshold > 0)) throw ConfigError("keep_probability: threshold must be positive");
  const double f = static_cast<double>(word_freq) / static_cast<double>(total);
  const double r = threshold / f;
  return std::min(1.0, std::sqrt(r) + r);
}

// Streams every line of every file, in order, as a token list. Lines are the
// sentence unit; invalid UTF-8 raises IngestError with the file byte offset.
inline void for_each_line(std::span<const std::string> paths,
                          const std::function<void(std::span<const std::string_view>)>& visit) {
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open corpus file: " + path);
    std::string line;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
      if (auto bad = utf8::find_invalid(line)) {
        throw IngestError(path + ": invalid UTF-8", offset + *bad);
      }
      const auto tokens = tokenize_view(line);
      visit(tokens);
      offset += line.size() + 1;
    }
  }
}

}  // namespace mglab

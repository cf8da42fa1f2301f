#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "mglab/corpus.hpp"
#include "mglab/error.hpp"
#include "mglab/log.hpp"
#include "mglab/utf8.hpp"

namespace mglab {

inline constexpr std::uint32_t kFnvOffsetBasis = 2166136261u;
inline constexpr std::uint32_t kFnvPrime = 16777619u;

// FNV-1a, 32 bit, over the raw UTF-8 bytes.
constexpr std::uint32_t fnv1a32(std::string_view bytes) noexcept {
  std::uint32_t h = kFnvOffsetBasis;
  for (char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t hash_subword(std::string_view unit, std::uint64_t bucket_count) {
  if (bucket_count < 1) throw ConfigError("bucket_count must be >= 1");
  return fnv1a32(unit) % bucket_count;
}

// Character n-grams of "<word>" over code points, all n_min-grams left to
// right, then n_min+1, and so on. The wrapped form itself appears only when
// its length falls inside [n_min, n_max].
inline std::vector<std::string> char_ngrams(std::string_view word, std::size_t n_min, std::size_t n_max) {
  if (n_min < 1 || n_min > n_max) throw ConfigError("char n-grams need 1 <= n_min <= n_max");
  std::string wrapped;
  wrapped.reserve(word.size() + 2);
  wrapped += '<';
  wrapped += word;
  wrapped += '>';
  const auto cps = utf8::code_points(wrapped);
  std::vector<std::string> grams;
  for (std::size_t n = n_min; n <= n_max && n <= cps.size(); ++n) {
    for (std::size_t i = 0; i + n <= cps.size(); ++i) {
      const char* begin = cps[i].data();
      const char* end = cps[i + n - 1].data() + cps[i + n - 1].size();
      grams.emplace_back(begin, end);
    }
  }
  return grams;
}

// SkipGram: the word row alone.
struct WholeWord {
  friend bool operator==(const WholeWord&, const WholeWord&) = default;
};

// FastText-style hashed character n-grams.
struct CharNgrams {
  std::size_t n_min = 3;
  std::size_t n_max = 6;
  std::uint64_t bucket_count = 2000000;

  void validate() const {
    if (n_min < 1 || n_min > n_max) throw ConfigError("char n-grams need 1 <= n_min <= n_max");
    if (bucket_count < 1) throw ConfigError("bucket_count must be >= 1");
  }
  friend bool operator==(const CharNgrams&, const CharNgrams&) = default;
};

// Word -> morpheme segmentation supplied by an external tool, plus a dense
// morpheme inventory. Morpheme ids follow first appearance in entry order.
class MorphLexicon {
 public:
  MorphLexicon() = default;

  // Later entries for the same word replace earlier ones but keep the
  // earlier position. Duplicate morphemes within a word are dropped.
  static MorphLexicon from_entries(const std::vector<std::pair<std::string, std::vector<std::string>>>& entries) {
    MorphLexicon lex;
    for (const auto& [word, morphs] : entries) {
      if (morphs.empty()) throw ConfigError("lexicon entry for '" + word + "' has no morphemes");
      std::vector<std::string> unique;
      for (const auto& m : morphs) {
        if (std::find(unique.begin(), unique.end(), m) == unique.end()) unique.push_back(m);
      }
      auto it = lex.slot_.find(word);
      if (it == lex.slot_.end()) {
        lex.slot_.emplace(word, lex.entries_.size());
        lex.entries_.emplace_back(word, std::move(unique));
      } else {
        lex.entries_[it->second].second = std::move(unique);
      }
    }
    for (const auto& [word, morphs] : lex.entries_) {
      for (const auto& m : morphs) {
        if (!lex.morph_ids_.contains(m)) {
          lex.morph_ids_.emplace(m, static_cast<std::uint32_t>(lex.morphemes_.size()));
          lex.morphemes_.push_back(m);
        }
      }
    }
    return lex;
  }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t morpheme_count() const noexcept { return morphemes_.size(); }

  const std::vector<std::pair<std::string, std::vector<std::string>>>& entries() const noexcept {
    return entries_;
  }
  const std::vector<std::string>& morphemes() const noexcept { return morphemes_; }

  const std::vector<std::string>* find(std::string_view word) const {
    auto it = slot_.find(word);
    return it == slot_.end() ? nullptr : &entries_[it->second].second;
  }

  std::uint32_t morpheme_id(std::string_view morph) const {
    auto it = morph_ids_.find(morph);
    if (it == morph_ids_.end()) throw LookupError("unknown morpheme '" + std::string(morph) + "'");
    return it->second;
  }

  friend bool operator==(const MorphLexicon& a, const MorphLexicon& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<std::pair<std::string, std::vector<std::string>>> entries_;
  std::unordered_map<std::string, std::size_t, detail::StringHash, std::equal_to<>> slot_;
  std::vector<std::string> morphemes_;
  std::unordered_map<std::string, std::uint32_t, detail::StringHash, std::equal_to<>> morph_ids_;
};

// Reads `word<TAB>morph1 morph2 ...` lines. Bad lines are reported through
// warn() and, when requested, collected by 1-based line number.
inline MorphLexicon load_morph_lexicon(const std::string& path, std::vector<std::size_t>* rejected = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open lexicon file: " + path);
  std::vector<std::pair<std::string, std::vector<std::string>>> entries;
  std::string line;
  std::size_t lineno = 0;
  auto reject = [&](const char* why) {
    warn(path + ":" + std::to_string(lineno) + ": " + why + ", line skipped");
    if (rejected) rejected->push_back(lineno);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (utf8::find_invalid(line)) {
      reject("invalid UTF-8");
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      reject("missing tab separator");
      continue;
    }
    const std::string_view word(line.data(), tab);
    if (word.empty() || tokenize_view(word).size() != 1) {
      reject("bad word field");
      continue;
    }
    std::vector<std::string> morphs;
    for (auto m : tokenize_view(std::string_view(line).substr(tab + 1))) morphs.emplace_back(m);
    if (morphs.empty()) {
      reject("no morphemes");
      continue;
    }
    entries.emplace_back(std::string(word), std::move(morphs));
  }
  return MorphLexicon::from_entries(entries);
}

using SegmentationStrategy = std::variant<WholeWord, CharNgrams, MorphLexicon>;

enum class StrategyKind : std::uint8_t { Whole = 0, CharNgrams = 1, MorphLexicon = 2 };

inline StrategyKind kind_of(const SegmentationStrategy& s) noexcept {
  return static_cast<StrategyKind>(s.index());
}

inline const char* kind_name(StrategyKind k) noexcept {
  switch (k) {
    case StrategyKind::Whole: return "sg";
    case StrategyKind::CharNgrams: return "ft";
    case StrategyKind::MorphLexicon: return "morph";
  }
  return "?";
}

// Rows beyond the vocabulary that a strategy adds to the input matrix.
inline std::size_t extra_rows(const SegmentationStrategy& s) {
  return std::visit(
      [](const auto& st) -> std::size_t {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, WholeWord>) {
          return 0;
        } else if constexpr (std::is_same_v<T, CharNgrams>) {
          return static_cast<std::size_t>(st.bucket_count);
        } else {
          return st.morpheme_count();
        }
      },
      s);
}

struct SubwordSet {
  std::vector<std::size_t> indices;
  std::vector<std::string> display;
};

// Input-matrix rows composing `word`: its own row first, then one row per
// n-gram (vocab_size + bucket) or per morpheme (vocab_size + morpheme id).
inline SubwordSet segment(std::string_view word, const SegmentationStrategy& strategy, const Vocabulary& vocab) {
  const WordId id = vocab.id(word);
  const std::size_t v = vocab.size();
  SubwordSet out;
  out.indices.push_back(id);
  out.display.emplace_back(word);
  std::visit(
      [&](const auto& st) {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, CharNgrams>) {
          for (auto& gram : char_ngrams(word, st.n_min, st.n_max)) {
            out.indices.push_back(v + static_cast<std::size_t>(hash_subword(gram, st.bucket_count)));
            out.display.push_back(std::move(gram));
          }
        } else if constexpr (std::is_same_v<T, MorphLexicon>) {
          if (const auto* morphs = st.find(word)) {
            for (const auto& m : *morphs) {
              out.indices.push_back(v + st.morpheme_id(m));
              out.display.push_back(m);
            }
          }
        }
      },
      strategy);
  return out;
}

// Precomputed segment() rows for every vocabulary word.
class SubwordIndexer {
 public:
  SubwordIndexer() = default;
  SubwordIndexer(const SegmentationStrategy& strategy, const Vocabulary& vocab)
      : vocab_size_(vocab.size()), extra_rows_(mglab::extra_rows(strategy)) {
    if (const auto* ng = std::get_if<CharNgrams>(&strategy)) ng->validate();
    offsets_.assign(1, 0);
    offsets_.reserve(vocab.size() + 1);
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      const auto set = segment(vocab.word(static_cast<WordId>(i)), strategy, vocab);
      for (auto r : set.indices) rows_.push_back(static_cast<std::uint32_t>(r));
      offsets_.push_back(rows_.size());
    }
  }

  std::span<const std::uint32_t> rows(WordId id) const noexcept {
    return {rows_.data() + offsets_[id], offsets_[id + 1] - offsets_[id]};
  }

  std::size_t vocab_size() const noexcept { return vocab_size_; }
  std::size_t extra_rows() const noexcept { return extra_rows_; }
  std::size_t input_rows() const noexcept { return vocab_size_ + extra_rows_; }

 private:
  std::size_t vocab_size_ = 0;
  std::size_t extra_rows_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> rows_;
};

}  // namespace mglab

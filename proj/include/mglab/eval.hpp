#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mglab/error.hpp"
#include "mglab/log.hpp"
#include "mglab/matrix.hpp"
#include "mglab/model.hpp"

namespace mglab {

// ---------------------------------------------------------------------------
// Rank correlation

// 1-based fractional ranks; tied values share the mean of their rank span.
inline std::vector<double> fractional_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw EvaluationError("correlation undefined for a constant list");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Spearman's rho: Pearson correlation of fractional ranks.
inline double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw EvaluationError("spearman: lists differ in length");
  if (xs.size() < 2) throw EvaluationError("spearman: need at least two observations");
  const auto rx = fractional_ranks(xs);
  const auto ry = fractional_ranks(ys);
  return pearson(rx, ry);
}

// ---------------------------------------------------------------------------
// Word similarity

struct SimilarityPair {
  std::string word1;
  std::string word2;
  double score;
};

struct SimilarityDataset {
  std::vector<SimilarityPair> pairs;
};

struct SimilarityColumns {
  std::size_t word1 = 0;
  std::size_t word2 = 1;
  std::size_t score = 3;  // SimLex-999 layout
  bool header = false;
};

inline SimilarityDataset load_similarity(const std::string& path, const SimilarityColumns& cols = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open similarity dataset: " + path);
  SimilarityDataset ds;
  std::string line;
  std::size_t lineno = 0;
  const std::size_t need = std::max({cols.word1, cols.word2, cols.score}) + 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (cols.header && lineno == 1) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.emplace_back(std::string_view(line).substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() == 1) fields = tokenize_view(line);  // whitespace-separated fallback
    double score = 0;
    if (fields.size() < need || !detail::parse_real(fields[cols.score], score)) {
      warn(path + ":" + std::to_string(lineno) + ": malformed similarity line, skipped");
      continue;
    }
    ds.pairs.push_back({std::string(fields[cols.word1]), std::string(fields[cols.word2]), score});
  }
  return ds;
}

struct SimilarityResult {
  double rho = 0;
  std::size_t used = 0;
  std::size_t oov = 0;
};

template <typename Real>
double cosine(std::span<const Real> a, std::span<const Real> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<double>(a[i]) * b[i];
    aa += static_cast<double>(a[i]) * a[i];
    bb += static_cast<double>(b[i]) * b[i];
  }
  if (aa == 0 || bb == 0) return 0;
  return ab / std::sqrt(aa * bb);
}

template <typename Real>
SimilarityResult eval_similarity(const EmbeddingModel<Real>& model, const SimilarityDataset& dataset) {
  if (dataset.pairs.empty()) throw EvaluationError("similarity dataset is empty");
  SimilarityResult res;
  std::vector<double> human, predicted;
  for (const auto& p : dataset.pairs) {
    const auto a = model.vocab().find(p.word1);
    const auto b = model.vocab().find(p.word2);
    if (!a || !b) {
      ++res.oov;
      continue;
    }
    const auto va = model.compose(*a);
    const auto vb = model.compose(*b);
    human.push_back(p.score);
    predicted.push_back(cosine<Real>(va, vb));
  }
  res.used = human.size();
  if (res.used < 2) {
    throw EvaluationError("similarity: fewer than 2 usable pairs (" + std::to_string(res.oov) + " of " +
                          std::to_string(dataset.pairs.size()) + " out of vocabulary)");
  }
  res.rho = spearman(human, predicted);
  return res;
}

// ---------------------------------------------------------------------------
// Analogies (3CosAdd)

struct AnalogyQuestion {
  std::string a, b, c;
  std::vector<std::string> answers;
};

struct AnalogyCategory {
  std::string name;
  std::vector<AnalogyQuestion> questions;
};

struct AnalogyDataset {
  std::vector<AnalogyCategory> categories;

  std::size_t question_count() const {
    std::size_t n = 0;
    for (const auto& c : categories) n += c.questions.size();
    return n;
  }
};

// Google format: ": name" opens a category, other lines hold four words.
inline AnalogyDataset load_google_analogy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open analogy dataset: " + path);
  AnalogyDataset ds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = tokenize_view(line);
    if (f.empty()) continue;
    if (f[0] == ":") {
      std::string name;
      for (std::size_t i = 1; i < f.size(); ++i) name += (i > 1 ? " " : "") + std::string(f[i]);
      ds.categories.push_back({name, {}});
      continue;
    }
    if (f.size() != 4) {
      warn(path + ":" + std::to_string(lineno) + ": expected 4 words, line skipped");
      continue;
    }
    if (ds.categories.empty()) ds.categories.push_back({"default", {}});
    ds.categories.back().questions.push_back(
        {std::string(f[0]), std::string(f[1]), std::string(f[2]), {std::string(f[3])}});
  }
  return ds;
}

namespace detail {

inline std::vector<std::string> split_answers(std::string_view field) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= field.size()) {
    const auto slash = field.find('/', start);
    const auto piece = field.substr(start, slash == std::string_view::npos ? std::string_view::npos : slash - start);
    if (!piece.empty() && std::find(out.begin(), out.end(), piece) == out.end()) out.emplace_back(piece);
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return out;
}

inline AnalogyCategory load_bats_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open BATS file: " + file.string());
  std::vector<std::pair<std::string, std::vector<std::string>>> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = tokenize_view(line);
    if (f.empty()) continue;
    auto answers = f.size() == 2 ? split_answers(f[1]) : std::vector<std::string>{};
    if (answers.empty()) {
      warn(file.string() + ":" + std::to_string(lineno) + ": expected 'word<TAB>answers', line skipped");
      continue;
    }
    pairs.emplace_back(std::string(f[0]), std::move(answers));
  }
  AnalogyCategory cat{file.stem().string(), {}};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      if (i == j) continue;
      // a : b :: c : d with (a, b) from line i and (c, answers) from line j.
      cat.questions.push_back({pairs[i].first, pairs[i].second.front(), pairs[j].first, pairs[j].second});
    }
  }
  return cat;
}

}  // namespace detail

// One file per category; a directory is searched recursively for *.txt files
// in lexicographic path order.
inline AnalogyDataset load_bats(const std::string& path) {
  namespace fs = std::filesystem;
  AnalogyDataset ds;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(path)) {
      if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) ds.categories.push_back(detail::load_bats_file(f));
  } else {
    ds.categories.push_back(detail::load_bats_file(path));
  }
  return ds;
}

// Composed vectors scaled to unit length; zero vectors stay zero.
template <typename Real>
class NormalizedEmbeddings {
 public:
  explicit NormalizedEmbeddings(const EmbeddingModel<Real>& model)
      : vocab_(&model.vocab()), vectors_(model.composed_matrix()) {
    for (std::size_t i = 0; i < vectors_.rows(); ++i) {
      auto r = vectors_.row(i);
      double n = 0;
      for (Real x : r) n += static_cast<double>(x) * x;
      n = std::sqrt(n);
      if (n > 0) {
        for (auto& x : r) x = static_cast<Real>(x / n);
      }
    }
  }

  const Vocabulary& vocab() const noexcept { return *vocab_; }
  const Matrix<Real>& vectors() const noexcept { return vectors_; }

  // Argmax of cos(v, b - a + c) over the vocabulary minus {a, b, c};
  // lowest id wins ties. nullopt when a, b or c is out of vocabulary.
  std::optional<WordId> solve(std::string_view a, std::string_view b, std::string_view c) const {
    const auto ia = vocab_->find(a), ib = vocab_->find(b), ic = vocab_->find(c);
    if (!ia || !ib || !ic) return std::nullopt;
    return solve(*ia, *ib, *ic);
  }

  WordId solve(WordId a, WordId b, WordId c) const {
    const std::size_t dim = vectors_.cols();
    std::vector<double> query(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      query[k] = static_cast<double>(vectors_(b, k)) - vectors_(a, k) + vectors_(c, k);
    }
    std::optional<WordId> best;
    double best_score = 0;
    for (std::size_t i = 0; i < vectors_.rows(); ++i) {
      if (i == a || i == b || i == c) continue;
      const auto row = vectors_.row(i);
      double s = 0;
      for (std::size_t k = 0; k < dim; ++k) s += query[k] * row[k];
      if (!best || s > best_score) {
        best = static_cast<WordId>(i);
        best_score = s;
      }
    }
    if (!best) throw EvaluationError("analogy: vocabulary has no candidate outside the query words");
    return *best;
  }

  // The k words with the highest cosine to `id`, excluding `id` itself.
  std::vector<WordId> nearest(WordId id, std::size_t k) const {
    const auto target = vectors_.row(id);
    std::vector<std::pair<double, WordId>> scored;
    for (std::size_t i = 0; i < vectors_.rows(); ++i) {
      if (i == id) continue;
      scored.emplace_back(-static_cast<double>(vec::dot<Real>(target, vectors_.row(i))), static_cast<WordId>(i));
    }
    k = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end());
    std::vector<WordId> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(scored[i].second);
    return out;
  }

 private:
  const Vocabulary* vocab_;
  Matrix<Real> vectors_;
};

template <typename Real>
std::optional<std::string> solve_analogy(const EmbeddingModel<Real>& model, std::string_view a, std::string_view b,
                                         std::string_view c) {
  NormalizedEmbeddings<Real> emb(model);
  if (auto id = emb.solve(a, b, c)) return model.vocab().word(*id);
  return std::nullopt;
}

struct CategoryAccuracy {
  std::string name;
  std::size_t correct = 0;
  std::size_t attempted = 0;
  std::size_t oov = 0;
  double accuracy() const { return attempted ? static_cast<double>(correct) / static_cast<double>(attempted) : 0.0; }
};

struct AnalogyResult {
  std::vector<CategoryAccuracy> categories;
  std::size_t correct = 0;
  std::size_t attempted = 0;
  std::size_t oov = 0;
  double micro = 0;  // pooled over all attempted questions
  double macro = 0;  // mean over categories with at least one attempt
};

// A question is skipped (counted as oov) if a, b or c is out of vocabulary
// or none of its answers is in vocabulary.
template <typename Real>
AnalogyResult eval_analogy(const EmbeddingModel<Real>& model, const AnalogyDataset& dataset) {
  if (dataset.question_count() == 0) throw EvaluationError("analogy dataset is empty");
  const NormalizedEmbeddings<Real> emb(model);
  const auto& vocab = model.vocab();
  AnalogyResult res;
  std::size_t scored_categories = 0;
  double macro_sum = 0;
  for (const auto& cat : dataset.categories) {
    CategoryAccuracy acc{cat.name};
    for (const auto& q : cat.questions) {
      const bool reachable =
          std::any_of(q.answers.begin(), q.answers.end(), [&](const auto& w) { return vocab.contains(w); });
      const auto predicted = reachable ? emb.solve(q.a, q.b, q.c) : std::nullopt;
      if (!predicted) {
        ++acc.oov;
        continue;
      }
      ++acc.attempted;
      const auto& word = vocab.word(*predicted);
      if (std::find(q.answers.begin(), q.answers.end(), word) != q.answers.end()) ++acc.correct;
    }
    res.correct += acc.correct;
    res.attempted += acc.attempted;
    res.oov += acc.oov;
    if (acc.attempted > 0) {
      macro_sum += acc.accuracy();
      ++scored_categories;
    }
    res.categories.push_back(std::move(acc));
  }
  if (res.attempted == 0) {
    throw EvaluationError("analogy: no question could be attempted (" + std::to_string(res.oov) +
                          " out of vocabulary)");
  }
  res.micro = static_cast<double>(res.correct) / static_cast<double>(res.attempted);
  res.macro = macro_sum / static_cast<double>(scored_categories);
  return res;
}

}  // namespace mglab

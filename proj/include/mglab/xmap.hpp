#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mglab/error.hpp"
#include "mglab/log.hpp"
#include "mglab/model.hpp"

// Supervised cross-lingual mapping: normalize both spaces, fit an orthogonal
// map on a seed dictionary, score translation retrieval with precision@k.
namespace mglab::xmap {

enum class NormStep { Unit, Center };

inline const char* step_name(NormStep s) noexcept { return s == NormStep::Unit ? "unit" : "center"; }

inline const std::vector<NormStep>& default_chain() {
  static const std::vector<NormStep> chain{NormStep::Unit, NormStep::Center, NormStep::Unit};
  return chain;
}

// Applies the steps in order. A unit step on a zero row raises, naming the
// row's word when `names` is provided.
inline Eigen::MatrixXd normalize(Eigen::MatrixXd m, const std::vector<NormStep>& steps,
                                 std::span<const std::string> names = {}) {
  for (auto step : steps) {
    if (step == NormStep::Center) {
      if (m.rows() > 0) m.rowwise() -= m.colwise().mean();
      continue;
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double n = m.row(i).norm();
      if (n == 0) {
        const auto who = static_cast<std::size_t>(i) < names.size() ? "'" + names[static_cast<std::size_t>(i)] + "'"
                                                                     : "row " + std::to_string(i);
        throw EvaluationError("cannot unit-normalize zero vector for " + who);
      }
      m.row(i) /= n;
    }
  }
  return m;
}

// Orthogonal W minimizing ||X W - Y||_F: W = U V^T for X^T Y = U S V^T.
inline Eigen::MatrixXd procrustes(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw EvaluationError("procrustes: X and Y shapes differ");
  if (x.rows() == 0) throw EvaluationError("procrustes: no paired rows");
  const Eigen::MatrixXd m = x.transpose() * y;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv.size() > 0 && sv(sv.size() - 1) <= 1e-12 * std::max(1.0, sv(0))) {
    warn("procrustes: cross-covariance is rank deficient; the orthogonal map is not unique");
  }
  return svd.matrixU() * svd.matrixV().transpose();
}

struct BilingualDictionary {
  std::vector<std::pair<std::string, std::string>> entries;
};

// Whitespace-separated `source target` lines.
inline BilingualDictionary load_dictionary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open dictionary: " + path);
  BilingualDictionary dict;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = tokenize_view(line);
    if (f.empty()) continue;
    if (f.size() != 2) {
      warn(path + ":" + std::to_string(lineno) + ": expected 'source target', line skipped");
      continue;
    }
    dict.entries.emplace_back(std::string(f[0]), std::string(f[1]));
  }
  return dict;
}

struct MappingResult {
  Eigen::MatrixXd transform;
  std::vector<NormStep> trace;
  std::map<std::size_t, double> precision_at;
  std::size_t train_pairs = 0;
  std::size_t train_oov = 0;
  std::size_t test_sources = 0;  // distinct source words scored
  std::size_t test_oov = 0;      // test entries dropped as out of vocabulary
};

template <typename Real>
Eigen::MatrixXd to_eigen(const Matrix<Real>& m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
  }
  return out;
}

// Ids of the k largest entries of `scores`, best first; lower id wins ties.
inline std::vector<Eigen::Index> top_k(const Eigen::VectorXd& scores, std::size_t k) {
  std::vector<Eigen::Index> ids(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i) ids[static_cast<std::size_t>(i)] = i;
  k = std::min(k, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(),
                    [&](Eigen::Index a, Eigen::Index b) { return scores(a) > scores(b) || (scores(a) == scores(b) && a < b); });
  ids.resize(k);
  return ids;
}

template <typename Real>
MappingResult eval_mapping(const EmbeddingModel<Real>& source, const EmbeddingModel<Real>& target,
                           const BilingualDictionary& train, const BilingualDictionary& test,
                           std::vector<std::size_t> ks, const std::vector<NormStep>& chain = default_chain()) {
  if (source.dim() != target.dim()) throw EvaluationError("mapping: source and target dimensions differ");
  if (ks.empty()) throw EvaluationError("mapping: no k requested");
  for (auto k : ks) {
    if (k == 0) throw EvaluationError("mapping: k must be positive");
  }
  const auto& sv = source.vocab();
  const auto& tv = target.vocab();
  const Eigen::MatrixXd xs = normalize(to_eigen(source.composed_matrix()), chain, sv.words());
  const Eigen::MatrixXd zs = normalize(to_eigen(target.composed_matrix()), chain, tv.words());

  MappingResult res;
  res.trace = chain;
  std::vector<std::pair<WordId, WordId>> pairs;
  for (const auto& [s, t] : train.entries) {
    const auto is = sv.find(s);
    const auto it = tv.find(t);
    if (is && it) {
      pairs.emplace_back(*is, *it);
    } else {
      ++res.train_oov;
    }
  }
  res.train_pairs = pairs.size();
  if (pairs.empty()) throw EvaluationError("mapping: no usable training pairs");
  const auto d = static_cast<Eigen::Index>(source.dim());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(pairs.size()), d);
  Eigen::MatrixXd y(static_cast<Eigen::Index>(pairs.size()), d);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = xs.row(pairs[i].first);
    y.row(static_cast<Eigen::Index>(i)) = zs.row(pairs[i].second);
  }
  res.transform = procrustes(x, y);

  // Gold targets per distinct source word.
  std::map<WordId, std::set<WordId>> gold;
  for (const auto& [s, t] : test.entries) {
    const auto is = sv.find(s);
    const auto it = tv.find(t);
    if (is && it) {
      gold[*is].insert(*it);
    } else {
      ++res.test_oov;
    }
  }
  if (gold.empty()) throw EvaluationError("mapping: empty usable test set");
  res.test_sources = gold.size();

  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  std::map<std::size_t, std::size_t> hits;
  for (const auto& [src, targets] : gold) {
    const Eigen::RowVectorXd mapped = xs.row(src) * res.transform;
    const Eigen::VectorXd scores = zs * mapped.transpose();
    const auto ranked = top_k(scores, ks.back());
    for (auto k : ks) {
      const auto limit = std::min(k, ranked.size());
      for (std::size_t r = 0; r < limit; ++r) {
        if (targets.contains(static_cast<WordId>(ranked[r]))) {
          ++hits[k];
          break;
        }
      }
    }
  }
  for (auto k : ks) res.precision_at[k] = static_cast<double>(hits[k]) / static_cast<double>(res.test_sources);
  return res;
}

}  // namespace mglab::xmap

#pragma once

// Finite-difference oracles shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "mglab/model.hpp"
#include "mglab/tagger.hpp"
#include "mglab/trainer.hpp"

namespace mglab::testing {

inline constexpr double kFdEpsilon = 1e-5;
inline constexpr double kGradTolerance = 1e-4;

// |a - n| / max(|a|, |n|, 1e-6).
inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

// Central difference of `loss` with respect to every entry of `params`.
inline std::vector<double> central_differences(std::span<double> params, const std::function<double()>& loss,
                                               double eps = kFdEpsilon) {
  std::vector<double> g(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + eps;
    const double up = loss();
    params[i] = saved - eps;
    const double down = loss();
    params[i] = saved;
    g[i] = (up - down) / (2 * eps);
  }
  return g;
}

struct SgnsInstance {
  EmbeddingModel<double> model;
  WordId center;
  WordId context;
  std::vector<WordId> negatives;
};

inline Vocabulary numbered_vocab(std::size_t n, const std::string& prefix = "w") {
  std::vector<std::pair<std::string, Count>> entries;
  for (std::size_t i = 0; i < n; ++i) entries.emplace_back(prefix + std::to_string(i), n - i);
  return Vocabulary::from_entries(entries);
}

// Random model over one of the three strategies with entries in [-1, 1].
inline SgnsInstance random_sgns_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> vocab_size(3, 8), dim(1, 8), kind(0, 2), nneg(1, 5);
  const std::size_t v = vocab_size(rng);
  auto vocab = numbered_vocab(v);
  SegmentationStrategy strategy = WholeWord{};
  switch (kind(rng)) {
    case 1: strategy = CharNgrams{1, 3, 13}; break;
    case 2: {
      std::vector<std::pair<std::string, std::vector<std::string>>> lex;
      for (std::size_t i = 0; i < v; i += 2) lex.push_back({"w" + std::to_string(i), {"m" + std::to_string(i % 3), "suffix"}});
      strategy = MorphLexicon::from_entries(lex);
      break;
    }
    default: break;
  }
  EmbeddingModel<double> model(std::move(vocab), strategy, dim(rng));
  std::uniform_real_distribution<double> u(-1, 1);
  for (auto& x : model.input().data()) x = u(rng);
  for (auto& x : model.output().data()) x = u(rng);
  std::uniform_int_distribution<WordId> word(0, static_cast<WordId>(v - 1));
  SgnsInstance inst{std::move(model), word(rng), word(rng), {}};
  const std::size_t k = nneg(rng);
  for (std::size_t i = 0; i < k; ++i) inst.negatives.push_back(word(rng));
  return inst;
}

// Max relative error between the update sgns_step applies with lr = 1 and
// central differences of sgns_loss, over every entry of both matrices.
inline double sgns_gradient_error(const SgnsInstance& inst) {
  auto fd_model = inst.model;
  auto loss = [&] { return sgns_loss<double>(fd_model, inst.center, inst.context, inst.negatives); };
  const auto num_in = central_differences(fd_model.input().data(), loss);
  const auto num_out = central_differences(fd_model.output().data(), loss);

  auto stepped = inst.model;
  sgns_step<double>(stepped, inst.center, inst.context, inst.negatives, 1.0);
  double worst = 0;
  for (std::size_t i = 0; i < num_in.size(); ++i) {
    const double analytic = inst.model.input().data()[i] - stepped.input().data()[i];
    worst = std::max(worst, relative_error(analytic, num_in[i]));
  }
  for (std::size_t i = 0; i < num_out.size(); ++i) {
    const double analytic = inst.model.output().data()[i] - stepped.output().data()[i];
    worst = std::max(worst, relative_error(analytic, num_out[i]));
  }
  return worst;
}

struct TaggerInstance {
  tagger::TaggerParams<double> params;
  tagger::WordTable<double> words;
  std::vector<std::string> sentence;
  std::size_t position;
  tagger::LabelId gold;
};

inline TaggerInstance random_tagger_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> dim(1, 4), hidden(1, 6), labels(2, 5), half(0, 2), len(1, 4);
  const std::size_t d = dim(rng), h = hidden(rng), l = labels(rng), window = 2 * half(rng) + 1;
  EmbeddingModel<double> model(numbered_vocab(4), WholeWord{}, d);
  std::uniform_real_distribution<double> u(-1, 1);
  for (auto& x : model.input().data()) x = u(rng);
  tagger::LabelSet set;
  for (std::size_t i = 0; i < l; ++i) set.add("L" + std::to_string(i));
  tagger::TaggerParams<double> p(window, d, h, set);
  for (auto* part : {&p.b1, &p.b2, &p.pad, &p.unk}) {
    for (auto& x : *part) x = u(rng);
  }
  for (auto& x : p.w1.data()) x = u(rng);
  for (auto& x : p.w2.data()) x = u(rng);
  // Known words plus one unknown word: pad, unk and word slots all occur.
  std::vector<std::string> sentence;
  std::uniform_int_distribution<int> tok(0, 4);
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) {
    const int t = tok(rng);
    sentence.push_back(t == 4 ? "unknown" : "w" + std::to_string(t));
  }
  std::uniform_int_distribution<std::size_t> pos(0, n - 1);
  std::uniform_int_distribution<tagger::LabelId> gold(0, static_cast<tagger::LabelId>(l - 1));
  return {std::move(p), tagger::WordTable<double>(model), std::move(sentence), pos(rng), gold(rng)};
}

// Checks backward() and the pad/unk routing of apply_step() against central
// differences of the cross-entropy through encode_window and forward.
inline double tagger_gradient_error(const TaggerInstance& inst) {
  auto p = inst.params;
  auto loss = [&] {
    const auto in = tagger::encode_window<double>(inst.sentence, inst.position, inst.words, p);
    return tagger::cross_entropy<double>(tagger::forward<double>(in.x, p).logits, inst.gold);
  };
  std::vector<std::vector<double>> numeric;
  numeric.push_back(central_differences(p.w1.data(), loss));
  numeric.push_back(central_differences(p.b1, loss));
  numeric.push_back(central_differences(p.w2.data(), loss));
  numeric.push_back(central_differences(p.b2, loss));
  numeric.push_back(central_differences(p.pad, loss));
  numeric.push_back(central_differences(p.unk, loss));

  const auto in = tagger::encode_window<double>(inst.sentence, inst.position, inst.words, inst.params);
  const auto act = tagger::forward<double>(in.x, inst.params);
  tagger::Gradients<double> g;
  tagger::backward<double>(in.x, inst.gold, inst.params, act, g);
  auto stepped = inst.params;
  tagger::apply_step<double>(stepped, g, in.slots, 1.0);
  auto diff = [](std::span<const double> before, std::span<const double> after) {
    std::vector<double> d(before.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = before[i] - after[i];
    return d;
  };
  const std::vector<std::vector<double>> analytic{
      diff(inst.params.w1.data(), stepped.w1.data()), diff(inst.params.b1, stepped.b1),
      diff(inst.params.w2.data(), stepped.w2.data()), diff(inst.params.b2, stepped.b2),
      diff(inst.params.pad, stepped.pad),             diff(inst.params.unk, stepped.unk)};
  double worst = 0;
  for (std::size_t part = 0; part < analytic.size(); ++part) {
    for (std::size_t i = 0; i < analytic[part].size(); ++i) {
      worst = std::max(worst, relative_error(analytic[part][i], numeric[part][i]));
    }
  }
  return worst;
}

}  // namespace mglab::testing

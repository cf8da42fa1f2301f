#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mglab/error.hpp"
#include "mglab/matrix.hpp"
#include "mglab/model.hpp"

// Window tagger over frozen embeddings: window concat -> affine -> tanh ->
// affine logits.
namespace mglab::tagger {

using LabelId = std::uint32_t;
inline constexpr LabelId kUnknownLabel = std::numeric_limits<LabelId>::max();

class LabelSet {
 public:
  LabelId add(std::string_view name) {
    if (auto id = find(name)) return *id;
    index_.emplace(std::string(name), static_cast<LabelId>(names_.size()));
    names_.emplace_back(name);
    return static_cast<LabelId>(names_.size() - 1);
  }
  std::optional<LabelId> find(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const std::string& name(LabelId id) const { return names_.at(id); }
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  friend bool operator==(const LabelSet& a, const LabelSet& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, LabelId, detail::StringHash, std::equal_to<>> index_;
};

struct TaggedSentence {
  std::vector<std::string> tokens;
  std::vector<LabelId> labels;  // kUnknownLabel for labels outside a fixed inventory
};

struct TaggedCorpus {
  std::vector<TaggedSentence> sentences;
  LabelSet labels;
  std::size_t label_column = 1;

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.tokens.size();
    return n;
  }
};

// CoNLL-2000 layout: `token POS chunk` columns, blank line between sentences.
// With `inventory` given, labels are resolved against it and unseen ones
// become kUnknownLabel; otherwise the inventory is grown from the file.
inline TaggedCorpus load_conll(const std::string& path, std::size_t label_column,
                               const LabelSet* inventory = nullptr) {
  if (label_column < 1) throw ConfigError("label column must be >= 1 (column 0 is the token)");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open CoNLL file: " + path);
  TaggedCorpus corpus;
  corpus.label_column = label_column;
  if (inventory) corpus.labels = *inventory;
  TaggedSentence current;
  auto flush = [&] {
    if (!current.tokens.empty()) corpus.sentences.push_back(std::move(current));
    current = {};
  };
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = tokenize_view(line);
    if (f.empty()) {
      flush();
      continue;
    }
    if (f.size() <= label_column) {
      throw ParseError(path, lineno, "expected at least " + std::to_string(label_column + 1) + " columns");
    }
    current.tokens.emplace_back(f[0]);
    if (inventory) {
      current.labels.push_back(corpus.labels.find(f[label_column]).value_or(kUnknownLabel));
    } else {
      current.labels.push_back(corpus.labels.add(f[label_column]));
    }
  }
  flush();
  return corpus;
}

// Frozen composed word vectors used as tagger input.
template <typename Real>
class WordTable {
 public:
  WordTable() = default;
  explicit WordTable(const EmbeddingModel<Real>& model) : vocab_(model.vocab()), vectors_(model.composed_matrix()) {}

  std::size_t dim() const noexcept { return vectors_.cols(); }
  const Vocabulary& vocab() const noexcept { return vocab_; }
  const Matrix<Real>& vectors() const noexcept { return vectors_; }
  std::optional<std::span<const Real>> find(std::string_view word) const {
    if (auto id = vocab_.find(word)) return vectors_.row(*id);
    return std::nullopt;
  }

 private:
  Vocabulary vocab_;
  Matrix<Real> vectors_;
};

template <typename Real>
struct TaggerParams {
  std::size_t window = 5;
  std::size_t dim = 0;
  std::size_t hidden = 128;
  LabelSet labels;
  Matrix<Real> w1;      // (window * dim) x hidden
  std::vector<Real> b1; // hidden
  Matrix<Real> w2;      // hidden x labels
  std::vector<Real> b2; // labels
  std::vector<Real> pad;
  std::vector<Real> unk;

  TaggerParams() = default;
  TaggerParams(std::size_t window_, std::size_t dim_, std::size_t hidden_, LabelSet labels_)
      : window(window_), dim(dim_), hidden(hidden_), labels(std::move(labels_)),
        w1(window_ * dim_, hidden_), b1(hidden_), w2(hidden_, labels.size()), b2(labels.size()),
        pad(dim_), unk(dim_) {
    if (window % 2 == 0) throw ConfigError("tagger window must be odd");
    if (dim == 0 || hidden == 0) throw ConfigError("tagger dimensions must be positive");
    if (labels.size() == 0) throw ConfigError("tagger needs at least one label");
  }

  std::size_t label_count() const noexcept { return b2.size(); }
  std::size_t input_width() const noexcept { return window * dim; }

  // Glorot-uniform weights, zero biases, small uniform pad/unk vectors.
  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto fill = [&](std::span<Real> d, double bound) {
      std::uniform_real_distribution<double> u(-bound, bound);
      for (auto& x : d) x = static_cast<Real>(u(rng));
    };
    fill(w1.data(), std::sqrt(6.0 / static_cast<double>(w1.rows() + w1.cols())));
    fill(w2.data(), std::sqrt(6.0 / static_cast<double>(w2.rows() + w2.cols())));
    std::fill(b1.begin(), b1.end(), Real{0});
    std::fill(b2.begin(), b2.end(), Real{0});
    fill(pad, 0.5 / static_cast<double>(dim));
    fill(unk, 0.5 / static_cast<double>(dim));
  }

  bool all_finite() const {
    auto ok = [](std::span<const Real> d) { return std::all_of(d.begin(), d.end(), [](Real x) { return std::isfinite(x); }); };
    return ok(w1.data()) && ok(b1) && ok(w2.data()) && ok(b2) && ok(pad) && ok(unk);
  }

  friend bool operator==(const TaggerParams&, const TaggerParams&) = default;
};

enum class Slot : std::uint8_t { Word, Pad, Unk };

template <typename Real>
struct WindowInput {
  std::vector<Real> x;
  std::vector<Slot> slots;  // one per window position
};

// Concatenation of the vectors at positions i - w/2 .. i + w/2.
template <typename Real>
WindowInput<Real> encode_window(std::span<const std::string> sentence, std::size_t i, const WordTable<Real>& words,
                                const TaggerParams<Real>& params) {
  const std::size_t half = params.window / 2;
  WindowInput<Real> in;
  in.x.reserve(params.input_width());
  for (std::size_t k = 0; k < params.window; ++k) {
    const auto pos = static_cast<std::ptrdiff_t>(i + k) - static_cast<std::ptrdiff_t>(half);
    std::span<const Real> v;
    if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(sentence.size())) {
      in.slots.push_back(Slot::Pad);
      v = params.pad;
    } else if (auto found = words.find(sentence[static_cast<std::size_t>(pos)])) {
      in.slots.push_back(Slot::Word);
      v = *found;
    } else {
      in.slots.push_back(Slot::Unk);
      v = params.unk;
    }
    in.x.insert(in.x.end(), v.begin(), v.end());
  }
  return in;
}

template <typename Real>
struct Activations {
  std::vector<Real> hidden;  // tanh(W1^T x + b1)
  std::vector<Real> logits;  // W2^T hidden + b2
};

template <typename Real>
Activations<Real> forward(std::span<const Real> x, const TaggerParams<Real>& p) {
  Activations<Real> a;
  a.hidden = p.b1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != Real{0}) vec::axpy<Real>(x[i], p.w1.row(i), a.hidden);
  }
  for (auto& h : a.hidden) h = std::tanh(h);
  a.logits = p.b2;
  for (std::size_t h = 0; h < a.hidden.size(); ++h) vec::axpy<Real>(a.hidden[h], p.w2.row(h), a.logits);
  return a;
}

// Lowest index among the maxima.
template <typename Real>
LabelId argmax(std::span<const Real> logits) {
  return static_cast<LabelId>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

template <typename Real>
Real cross_entropy(std::span<const Real> logits, LabelId gold) {
  const Real m = *std::max_element(logits.begin(), logits.end());
  Real z{0};
  for (Real l : logits) z += std::exp(l - m);
  return std::log(z) + m - logits[gold];
}

template <typename Real>
struct Gradients {
  Matrix<Real> w1;
  std::vector<Real> b1;
  Matrix<Real> w2;
  std::vector<Real> b2;
  std::vector<Real> x;  // d loss / d input window
};

// Gradient of softmax cross-entropy at (x, gold). Returns the loss.
template <typename Real>
Real backward(std::span<const Real> x, LabelId gold, const TaggerParams<Real>& p, const Activations<Real>& a,
              Gradients<Real>& g) {
  const std::size_t L = p.label_count(), H = p.hidden;
  const Real loss = cross_entropy<Real>(a.logits, gold);
  const Real m = *std::max_element(a.logits.begin(), a.logits.end());
  g.b2.resize(L);
  Real z{0};
  for (std::size_t l = 0; l < L; ++l) z += (g.b2[l] = std::exp(a.logits[l] - m));
  for (auto& d : g.b2) d /= z;
  g.b2[gold] -= Real{1};

  g.w2 = Matrix<Real>(H, L);
  g.b1.assign(H, Real{0});
  for (std::size_t h = 0; h < H; ++h) {
    auto row = g.w2.row(h);
    for (std::size_t l = 0; l < L; ++l) row[l] = a.hidden[h] * g.b2[l];
    g.b1[h] = vec::dot<Real>(p.w2.row(h), g.b2) * (Real{1} - a.hidden[h] * a.hidden[h]);
  }
  g.w1 = Matrix<Real>(x.size(), H);
  g.x.assign(x.size(), Real{0});
  for (std::size_t i = 0; i < x.size(); ++i) {
    vec::axpy<Real>(x[i], g.b1, g.w1.row(i));
    g.x[i] = vec::dot<Real>(p.w1.row(i), g.b1);
  }
  return loss;
}

// Applies -lr * gradient to weights, biases and the pad/unk vectors used in
// the window. Word embeddings are never touched.
template <typename Real>
void apply_step(TaggerParams<Real>& p, const Gradients<Real>& g, std::span<const Slot> slots, Real lr) {
  vec::axpy<Real>(-lr, g.w1.data(), p.w1.data());
  vec::axpy<Real>(-lr, g.b1, p.b1);
  vec::axpy<Real>(-lr, g.w2.data(), p.w2.data());
  vec::axpy<Real>(-lr, g.b2, p.b2);
  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (slots[k] == Slot::Word) continue;
    auto& target = slots[k] == Slot::Pad ? p.pad : p.unk;
    const std::span<const Real> part(g.x.data() + k * p.dim, p.dim);
    vec::axpy<Real>(-lr, part, target);
  }
}

struct TaggerConfig {
  std::size_t window = 5;
  std::size_t hidden = 128;
  std::size_t epochs = 50;
  double lr = 0.01;
  std::uint64_t seed = 1;
};

struct EpochStats {
  double mean_loss = 0;
  double train_accuracy = 0;
};

// Per-token SGD; sentence order is reshuffled every epoch.
template <typename Real>
TaggerParams<Real> train_tagger(const TaggedCorpus& corpus, const WordTable<Real>& words, const TaggerConfig& config,
                                std::vector<EpochStats>* history = nullptr) {
  if (corpus.sentences.empty()) throw ConfigError("tagger training corpus is empty");
  if (config.epochs < 1) throw ConfigError("tagger epochs must be >= 1");
  if (!(config.lr >= 0)) throw ConfigError("tagger learning rate must be non-negative");
  TaggerParams<Real> params(config.window, words.dim(), config.hidden, corpus.labels);
  params.initialize(config.seed);
  std::mt19937_64 rng(config.seed + 1);
  std::vector<std::size_t> order(corpus.sentences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Gradients<Real> grads;
  const Real lr = static_cast<Real>(config.lr);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    std::size_t tokens = 0, correct = 0;
    for (auto si : order) {
      const auto& s = corpus.sentences[si];
      for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        if (s.labels[i] == kUnknownLabel) continue;
        const auto in = encode_window<Real>(s.tokens, i, words, params);
        const auto act = forward<Real>(in.x, params);
        const Real loss = backward<Real>(in.x, s.labels[i], params, act, grads);
        if (!std::isfinite(loss)) {
          throw TrainingError("tagger: non-finite loss in epoch " + std::to_string(epoch + 1) + " at token '" +
                              s.tokens[i] + "'");
        }
        if (argmax<Real>(act.logits) == s.labels[i]) ++correct;
        loss_sum += static_cast<double>(loss);
        ++tokens;
        if (lr != Real{0}) apply_step<Real>(params, grads, in.slots, lr);
      }
    }
    if (history && tokens > 0) {
      history->push_back({loss_sum / static_cast<double>(tokens), static_cast<double>(correct) / static_cast<double>(tokens)});
    }
  }
  return params;
}

template <typename Real>
std::vector<LabelId> predict(std::span<const std::string> sentence, const TaggerParams<Real>& params,
                             const WordTable<Real>& words) {
  std::vector<LabelId> out;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    const auto in = encode_window<Real>(sentence, i, words, params);
    out.push_back(argmax<Real>(forward<Real>(in.x, params).logits));
  }
  return out;
}

// Token accuracy; gold labels outside the parameter inventory count as errors.
template <typename Real>
double evaluate_tagger(const TaggerParams<Real>& params, const TaggedCorpus& corpus, const WordTable<Real>& words) {
  if (!(corpus.labels == params.labels)) throw EvaluationError("tagger: corpus label inventory differs from model");
  const std::size_t total = corpus.token_count();
  if (total == 0) throw EvaluationError("tagger: evaluation corpus is empty");
  std::size_t correct = 0;
  for (const auto& s : corpus.sentences) {
    const auto pred = predict<Real>(s.tokens, params, words);
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == s.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Parameter file: "MGTAG1", u32 version, u8 scalar width, u64 window, dim,
// hidden, label count, labels as strings, then w1, b1, w2, b2, pad, unk.

inline constexpr std::string_view kTaggerMagic = "MGTAG1";

template <typename Real>
void save_params(const TaggerParams<Real>& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  mglab::detail::BinWriter w(out);
  out.write(kTaggerMagic.data(), kTaggerMagic.size());
  w.pod(std::uint32_t{1});
  w.pod(static_cast<std::uint8_t>(sizeof(Real)));
  w.pod(static_cast<std::uint64_t>(p.window));
  w.pod(static_cast<std::uint64_t>(p.dim));
  w.pod(static_cast<std::uint64_t>(p.hidden));
  w.pod(static_cast<std::uint64_t>(p.labels.size()));
  for (const auto& n : p.labels.names()) w.str(n);
  w.span(p.w1.data());
  w.span(std::span<const Real>(p.b1));
  w.span(p.w2.data());
  w.span(std::span<const Real>(p.b2));
  w.span(std::span<const Real>(p.pad));
  w.span(std::span<const Real>(p.unk));
  if (!out) throw Error("write failed: " + path);
}

template <typename Real>
TaggerParams<Real> load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  mglab::detail::BinReader r(in, path);
  std::array<char, kTaggerMagic.size()> magic{};
  in.read(magic.data(), magic.size());
  if (!in || std::string_view(magic.data(), magic.size()) != kTaggerMagic) r.fail("not a tagger parameter file");
  if (r.pod<std::uint32_t>() != 1) r.fail("unsupported tagger file version");
  if (r.pod<std::uint8_t>() != sizeof(Real)) r.fail("scalar width mismatch");
  const auto window = r.pod<std::uint64_t>();
  const auto dim = r.pod<std::uint64_t>();
  const auto hidden = r.pod<std::uint64_t>();
  const auto nlabels = r.pod<std::uint64_t>();
  LabelSet labels;
  for (std::uint64_t i = 0; i < nlabels; ++i) labels.add(r.str());
  TaggerParams<Real> p(window, dim, hidden, std::move(labels));
  r.span(p.w1.data());
  r.span(std::span<Real>(p.b1));
  r.span(p.w2.data());
  r.span(std::span<Real>(p.b2));
  r.span(std::span<Real>(p.pad));
  r.span(std::span<Real>(p.unk));
  return p;
}

}  // namespace mglab::tagger

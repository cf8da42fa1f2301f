#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "mglab/corpus.hpp"
#include "mglab/error.hpp"
#include "mglab/matrix.hpp"
#include "mglab/model.hpp"
#include "mglab/segmenter.hpp"

namespace mglab {

struct TrainConfig {
  std::size_t dim = kDefaultDim;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double lr0 = 0.05;
  double subsample = 1e-4;  // <= 0 disables subsampling
  Count min_count = 5;
  std::size_t max_vocab = kDefaultMaxVocab;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  double noise_exponent = 0.75;
  std::size_t negative_table_size = 10000000;
  std::uint64_t log_interval = 100000;
  double ema_factor = 0.999;

  void validate() const {
    if (dim < 1) throw ConfigError("dim must be >= 1");
    if (window < 1) throw ConfigError("window must be >= 1");
    if (negatives < 1) throw ConfigError("negatives must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(lr0 > 0)) throw ConfigError("lr0 must be positive");
    if (min_count < 1) throw ConfigError("min_count must be >= 1");
    if (max_vocab < 1) throw ConfigError("max_vocab must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (!(noise_exponent >= 0)) throw ConfigError("noise exponent must be non-negative");
    if (!(ema_factor >= 0 && ema_factor < 1)) throw ConfigError("ema factor must be in [0, 1)");
  }
};

// Unigram^exponent noise distribution laid out as a flat table of word ids.
class NegativeTable {
 public:
  NegativeTable() = default;
  explicit NegativeTable(std::vector<WordId> entries) : entries_(std::move(entries)) {}

  std::span<const WordId> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  template <typename Rng>
  WordId sample(Rng& rng) const {
    std::uniform_int_distribution<std::size_t> pick(0, entries_.size() - 1);
    return entries_[pick(rng)];
  }

 private:
  std::vector<WordId> entries_;
};

// Word i fills [round(L * c_{i-1}), round(L * c_i)) where c_i is the
// cumulative normalized weight.
inline NegativeTable build_negative_table(const Vocabulary& vocab, double exponent, std::size_t table_len) {
  if (vocab.empty()) throw ConfigError("negative table needs a non-empty vocabulary");
  if (table_len < vocab.size()) throw ConfigError("negative table shorter than vocabulary");
  std::vector<double> weights(vocab.size());
  double total = 0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    weights[i] = std::pow(static_cast<double>(vocab.counts()[i]), exponent);
    total += weights[i];
  }
  if (!(total > 0)) throw ConfigError("negative table needs positive word counts");
  std::vector<WordId> entries(table_len);
  double cumulative = 0;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    cumulative += weights[i];
    std::size_t end = i + 1 == vocab.size()
                          ? table_len
                          : static_cast<std::size_t>(std::llround(cumulative / total * static_cast<double>(table_len)));
    end = std::clamp(end, begin, table_len);
    std::fill(entries.begin() + static_cast<std::ptrdiff_t>(begin), entries.begin() + static_cast<std::ptrdiff_t>(end),
              static_cast<WordId>(i));
    begin = end;
  }
  return NegativeTable(std::move(entries));
}

// log(sigmoid(x)) without overflow for large |x|.
template <typename Real>
Real log_sigmoid(Real x) noexcept {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

template <typename Real>
Real sigmoid(Real x) noexcept {
  if (x >= 0) return Real{1} / (Real{1} + std::exp(-x));
  const Real e = std::exp(x);
  return e / (Real{1} + e);
}

// -log sigma(s(context, center)) - sum over negatives of log sigma(-s(neg, center)).
template <typename Real>
Real sgns_loss(const EmbeddingModel<Real>& model, WordId center, WordId context, std::span<const WordId> negatives) {
  const auto h = model.compose(center);
  Real loss = -log_sigmoid(vec::dot<Real>(h, model.output().row(context)));
  for (WordId n : negatives) loss -= log_sigmoid(-vec::dot<Real>(h, model.output().row(n)));
  return loss;
}

template <typename Real>
Real sgns_loss(const EmbeddingModel<Real>& model, std::string_view center, std::string_view context,
               std::span<const std::string> negatives) {
  std::vector<WordId> ids;
  for (const auto& n : negatives) ids.push_back(model.vocab().id(n));
  return sgns_loss(model, model.vocab().id(center), model.vocab().id(context), std::span<const WordId>(ids));
}

// Scratch buffers for sgns_step; one per worker.
template <typename Real>
struct SgnsWorkspace {
  std::vector<Real> hidden;
  std::vector<Real> grad;
  std::vector<Real> coeff;
};

// One SGD step on a (center, context, negatives) triple. Every coefficient is
// computed from pre-update rows. Returns the pre-update loss.
template <typename Real>
Real sgns_step(EmbeddingModel<Real>& model, WordId center, WordId context, std::span<const WordId> negatives, Real lr,
               SgnsWorkspace<Real>& ws) {
  const std::size_t dim = model.dim();
  auto& in = model.input();
  auto& out = model.output();
  ws.hidden.resize(dim);
  ws.grad.assign(dim, Real{0});
  ws.coeff.resize(negatives.size() + 1);
  model.compose_into(center, ws.hidden);
  const std::span<const Real> h(ws.hidden);

  Real loss{0};
  for (std::size_t t = 0; t <= negatives.size(); ++t) {
    const WordId target = t == 0 ? context : negatives[t - 1];
    const Real s = vec::dot<Real>(h, out.row(target));
    if (t == 0) {
      loss -= log_sigmoid(s);
      ws.coeff[t] = sigmoid(s) - Real{1};
    } else {
      loss -= log_sigmoid(-s);
      ws.coeff[t] = sigmoid(s);
    }
    vec::axpy<Real>(ws.coeff[t], out.row(target), ws.grad);
  }
  for (std::size_t t = 0; t <= negatives.size(); ++t) {
    const WordId target = t == 0 ? context : negatives[t - 1];
    vec::axpy<Real>(-lr * ws.coeff[t], h, out.row(target));
  }
  for (auto r : model.subword_rows(center)) vec::axpy<Real>(-lr, ws.grad, in.row(r));
  return loss;
}

template <typename Real>
Real sgns_step(EmbeddingModel<Real>& model, WordId center, WordId context, std::span<const WordId> negatives, Real lr) {
  SgnsWorkspace<Real> ws;
  return sgns_step(model, center, context, negatives, lr, ws);
}

// ---------------------------------------------------------------------------

// Corpus lines mapped to vocabulary ids; out-of-vocabulary tokens removed.
struct EncodedCorpus {
  Vocabulary vocab;
  CorpusStats stats;
  std::vector<std::vector<WordId>> lines;
};

inline EncodedCorpus read_corpus(std::span<const std::string> paths, Count min_count, std::size_t max_vocab) {
  VocabBuilder builder;
  for_each_line(paths, [&](std::span<const std::string_view> tokens) {
    for (auto t : tokens) builder.add(t);
  });
  EncodedCorpus corpus;
  corpus.vocab = builder.build(min_count, max_vocab, &corpus.stats);
  for_each_line(paths, [&](std::span<const std::string_view> tokens) {
    std::vector<WordId> ids;
    for (auto t : tokens) {
      if (auto id = corpus.vocab.find(t)) ids.push_back(*id);
    }
    if (ids.size() > 1) corpus.lines.push_back(std::move(ids));
  });
  return corpus;
}

struct TrainProgress {
  std::uint64_t step = 0;
  double lr = 0;
  double loss_ema = 0;
};

template <typename Real>
struct StepRecord {
  WordId center;
  WordId context;
  std::span<const WordId> negatives;
  Real lr;
};

template <typename Real>
struct TrainHooks {
  std::ostream* log = nullptr;  // receives `step=<n> lr=<v> loss=<ema>` lines
  std::function<void(const TrainProgress&)> on_progress;
  std::function<void(const StepRecord<Real>&)> on_step;  // called before each update
};

struct TrainReport {
  std::uint64_t steps = 0;
  std::uint64_t tokens_processed = 0;
  double initial_loss_ema = 0;
  double final_loss_ema = 0;
  double first_decile_mean_loss = 0;  // over steps taken in the first 10% of the schedule
  double last_decile_mean_loss = 0;   // over steps taken in the last 10%
  double final_lr = 0;
};

inline double scheduled_lr(double lr0, double progress) noexcept {
  progress = std::clamp(progress, 0.0, 1.0);
  return lr0 * (1.0 - progress * (1.0 - 1e-4));
}

namespace detail {

struct WorkerResult {
  std::uint64_t steps = 0;
  double initial_ema = 0;
  double ema = 0;
  double first_sum = 0;
  std::uint64_t first_n = 0;
  double last_sum = 0;
  std::uint64_t last_n = 0;
  double last_lr = 0;
};

inline std::uint64_t worker_seed(std::uint64_t seed, std::size_t worker) noexcept {
  return seed ^ (0x9E3779B97F4A7C15ull * (worker + 1));
}

}  // namespace detail

// Skip-gram with negative sampling over the model's subword composition.
// Lines are split round-robin over workers, which update the shared matrices
// without locks; a single worker is bit-reproducible for a fixed seed.
template <typename Real>
TrainReport train_model(EmbeddingModel<Real>& model, const std::vector<std::vector<WordId>>& lines,
                        const TrainConfig& config, const TrainHooks<Real>& hooks = {}) {
  config.validate();
  const auto& vocab = model.vocab();
  if (vocab.size() < 2) throw ConfigError("training needs at least two vocabulary words");
  if (model.dim() != config.dim) throw ConfigError("model dimension does not match config");

  std::uint64_t tokens_per_epoch = 0;
  for (const auto& l : lines) tokens_per_epoch += l.size();
  if (tokens_per_epoch == 0) throw ConfigError("empty effective corpus");
  const double total_tokens = static_cast<double>(tokens_per_epoch) * static_cast<double>(config.epochs);

  const NegativeTable table = build_negative_table(vocab, config.noise_exponent, config.negative_table_size);
  {
    const auto e = table.entries();
    if (std::all_of(e.begin(), e.end(), [&](WordId w) { return w == e.front(); })) {
      throw ConfigError("noise distribution collapsed to a single word");
    }
  }
  std::vector<double> keep(vocab.size(), 1.0);
  if (config.subsample > 0) {
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      keep[i] = keep_probability(vocab.counts()[i], vocab.total_tokens(), config.subsample);
    }
  }

  std::atomic<std::uint64_t> processed{0};
  std::atomic<std::uint64_t> global_steps{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<detail::WorkerResult> results(config.workers);

  auto work = [&](std::size_t worker) {
    try {
      std::mt19937_64 rng(detail::worker_seed(config.seed, worker));
      std::uniform_real_distribution<double> coin(0.0, 1.0);
      std::uniform_int_distribution<std::size_t> reach(1, config.window);
      SgnsWorkspace<Real> ws;
      std::vector<WordId> kept;
      std::vector<WordId> negs(config.negatives);
      auto& res = results[worker];
      bool first_step = true;

      for (std::size_t epoch = 0; epoch < config.epochs && !stop; ++epoch) {
        for (std::size_t li = worker; li < lines.size() && !stop; li += config.workers) {
          const auto& line = lines[li];
          kept.clear();
          for (WordId w : line) {
            if (keep[w] >= 1.0 || coin(rng) < keep[w]) kept.push_back(w);
          }
          const std::uint64_t base = processed.load(std::memory_order_relaxed);
          const double progress = static_cast<double>(base) / total_tokens;
          const Real lr = static_cast<Real>(scheduled_lr(config.lr0, progress));
          for (std::size_t i = 0; i < kept.size(); ++i) {
            const std::size_t b = reach(rng);
            const std::size_t lo = i >= b ? i - b : 0;
            const std::size_t hi = std::min(kept.size() - 1, i + b);
            for (std::size_t j = lo; j <= hi; ++j) {
              if (j == i) continue;
              const WordId center = kept[i];
              const WordId context = kept[j];
              for (auto& n : negs) {
                do {
                  n = table.sample(rng);
                } while (n == context);
              }
              if (hooks.on_step) hooks.on_step(StepRecord<Real>{center, context, negs, lr});
              const Real loss = sgns_step<Real>(model, center, context, negs, lr, ws);
              if (!std::isfinite(loss)) {
                throw TrainingError("non-finite loss at step " + std::to_string(res.steps) + " (center '" +
                                    vocab.word(center) + "', context '" + vocab.word(context) +
                                    "', lr " + std::to_string(lr) + ")");
              }
              const double l = static_cast<double>(loss);
              if (first_step) {
                res.initial_ema = res.ema = l;
                first_step = false;
              } else {
                res.ema = config.ema_factor * res.ema + (1.0 - config.ema_factor) * l;
              }
              if (progress < 0.1) {
                res.first_sum += l;
                ++res.first_n;
              } else if (progress >= 0.9) {
                res.last_sum += l;
                ++res.last_n;
              }
              ++res.steps;
              res.last_lr = static_cast<double>(lr);
              const std::uint64_t step = global_steps.fetch_add(1, std::memory_order_relaxed) + 1;
              if (worker == 0 && config.log_interval > 0 && step % config.log_interval == 0) {
                const TrainProgress p{step, static_cast<double>(lr), res.ema};
                if (hooks.log) *hooks.log << "step=" << p.step << " lr=" << p.lr << " loss=" << p.loss_ema << '\n';
                if (hooks.on_progress) hooks.on_progress(p);
              }
            }
          }
          processed.fetch_add(line.size(), std::memory_order_relaxed);
        }
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      stop = true;
    }
  };

  if (config.workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < config.workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  TrainReport report;
  report.tokens_processed = processed.load();
  double first_sum = 0, last_sum = 0;
  std::uint64_t first_n = 0, last_n = 0, active = 0;
  for (const auto& r : results) {
    report.steps += r.steps;
    first_sum += r.first_sum;
    first_n += r.first_n;
    last_sum += r.last_sum;
    last_n += r.last_n;
    report.final_lr = std::max(report.final_lr, r.last_lr);
    if (r.steps > 0) {
      report.initial_loss_ema += r.initial_ema;
      report.final_loss_ema += r.ema;
      ++active;
    }
  }
  if (active > 0) {
    report.initial_loss_ema /= static_cast<double>(active);
    report.final_loss_ema /= static_cast<double>(active);
  }
  report.first_decile_mean_loss = first_n ? first_sum / static_cast<double>(first_n) : 0;
  report.last_decile_mean_loss = last_n ? last_sum / static_cast<double>(last_n) : 0;
  if (!model.all_finite()) throw TrainingError("non-finite values in trained matrices");
  if (hooks.log) {
    *hooks.log << "done steps=" << report.steps << " lr=" << report.final_lr << " loss=" << report.final_loss_ema
               << '\n';
  }
  return report;
}

// Reads the corpus, builds the vocabulary and model, and trains it.
template <typename Real>
EmbeddingModel<Real> train(std::span<const std::string> corpus_paths, const SegmentationStrategy& strategy,
                           const TrainConfig& config, TrainReport* report = nullptr,
                           const TrainHooks<Real>& hooks = {}) {
  config.validate();
  auto corpus = read_corpus(corpus_paths, config.min_count, config.max_vocab);
  if (corpus.vocab.empty() || corpus.lines.empty()) throw ConfigError("empty effective corpus after vocabulary filtering");
  EmbeddingModel<Real> model(std::move(corpus.vocab), strategy, config.dim);
  model.initialize(config.seed);
  auto r = train_model(model, corpus.lines, config, hooks);
  if (report) *report = r;
  return model;
}

}  // namespace mglab

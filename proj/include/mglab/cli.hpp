#pragma once

#include <CLI11.hpp>

#include <array>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mglab/corpus.hpp"
#include "mglab/error.hpp"
#include "mglab/eval.hpp"
#include "mglab/model.hpp"
#include "mglab/segmenter.hpp"
#include "mglab/tagger.hpp"
#include "mglab/trainer.hpp"
#include "mglab/xmap.hpp"

// Command-line front end. Every subcommand writes a tab-separated report
// (`field<TAB>value` lines in a fixed order) to stdout and, with --report, to
// a file. Usage and configuration errors exit with 2, other failures with 1.
namespace mglab::cli {

using Real = float;

inline constexpr int kExitUsage = 2;
inline constexpr int kExitFailure = 1;

struct TrainOptions {
  std::string kind;
  std::vector<std::string> corpus;
  std::string lexicon;
  std::string out;
  std::string vectors;
  std::string vocab_out;
  std::size_t minn = 3;
  std::size_t maxn = 6;
  std::uint64_t buckets = 2000000;
  TrainConfig config;
};

struct EvalSimOptions {
  std::string model;
  std::string dataset;
  std::vector<std::size_t> columns{0, 1, 3};
  bool header = false;
};

struct EvalAnalogyOptions {
  std::string model;
  std::string dataset;
  std::string format = "google";
};

struct MapOptions {
  std::string source;
  std::string target;
  std::string train_dict;
  std::string test_dict;
  std::vector<std::size_t> k{1, 10};
};

struct TagTrainOptions {
  std::string embeddings;
  std::string train;
  std::string out;
  std::size_t label_column = 1;
  tagger::TaggerConfig config;
};

struct TagEvalOptions {
  std::string embeddings;
  std::string params;
  std::string test;
  std::size_t label_column = 1;
};

struct CompareOptions {
  std::vector<std::string> models;
  std::string similarity;
  std::vector<std::size_t> columns{0, 1, 3};
  bool header = false;
  std::string analogy;
  std::string format = "google";
};

// Accumulates report lines; flushed to stdout and the optional report file.
class Report {
 public:
  template <typename... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((buf_ << (first ? "" : "\t") << format(fields), first = false), ...);
    buf_ << '\n';
  }
  std::string str() const { return buf_.str(); }

 private:
  static std::string format(double v) {
    std::array<char, 64> tmp;
    auto [p, ec] = std::to_chars(tmp.data(), tmp.data() + tmp.size(), v, std::chars_format::fixed, 6);
    return std::string(tmp.data(), p);
  }
  static std::string format(float v) { return format(static_cast<double>(v)); }
  template <typename T>
  static std::string format(const T& v) {
    std::ostringstream s;
    s << v;
    return s.str();
  }
  std::ostringstream buf_;
};

inline void emit(const Report& report, const std::string& path, std::ostream& out) {
  out << report.str();
  if (!path.empty()) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write report " + path);
    f << report.str();
  }
}

inline void require_file(const std::string& flag, const std::string& path) {
  if (!std::filesystem::exists(path)) throw ConfigError(flag + ": no such file: " + path);
}

inline SegmentationStrategy make_strategy(const TrainOptions& o) {
  if (o.kind == "sg") return WholeWord{};
  if (o.kind == "ft") {
    CharNgrams ng{o.minn, o.maxn, o.buckets};
    ng.validate();
    return ng;
  }
  if (o.lexicon.empty()) throw ConfigError("--model morph requires --lexicon");
  require_file("--lexicon", o.lexicon);
  return load_morph_lexicon(o.lexicon);
}

inline void run_train(const TrainOptions& o, const std::string& report_path, std::ostream& out, std::ostream& err) {
  for (const auto& c : o.corpus) require_file("--corpus", c);
  const auto strategy = make_strategy(o);
  auto config = o.config;
  config.validate();
  TrainReport tr;
  TrainHooks<Real> hooks;
  hooks.log = &err;
  const auto model = train<Real>(o.corpus, strategy, config, &tr, hooks);
  save_checkpoint(model, o.out);
  if (!o.vectors.empty()) save_text(model, o.vectors);
  if (!o.vocab_out.empty()) {
    std::ofstream v(o.vocab_out, std::ios::binary);
    if (!v) throw ConfigError("cannot write " + o.vocab_out);
    model.vocab().write_tsv(v);
  }
  Report r;
  r.row("report", "train");
  r.row("model", o.kind);
  r.row("checkpoint", o.out);
  r.row("vocab", model.vocab().size());
  r.row("input_rows", model.input().rows());
  r.row("dim", model.dim());
  r.row("steps", tr.steps);
  r.row("tokens", tr.tokens_processed);
  r.row("initial_loss", tr.initial_loss_ema);
  r.row("final_loss", tr.final_loss_ema);
  r.row("final_lr", tr.final_lr);
  emit(r, report_path, out);
}

inline SimilarityColumns similarity_columns(const std::vector<std::size_t>& cols, bool header) {
  if (cols.size() != 3) throw ConfigError("--columns needs three indices: word1,word2,score");
  return {cols[0], cols[1], cols[2], header};
}

inline AnalogyDataset load_analogy(const std::string& path, const std::string& format) {
  require_file("--dataset", path);
  if (format == "google") return load_google_analogy(path);
  if (format == "bats") return load_bats(path);
  throw ConfigError("--format must be google or bats");
}

inline void run_eval_sim(const EvalSimOptions& o, const std::string& report_path, std::ostream& out) {
  require_file("--model", o.model);
  require_file("--dataset", o.dataset);
  const auto model = load_model<Real>(o.model);
  const auto ds = load_similarity(o.dataset, similarity_columns(o.columns, o.header));
  const auto res = eval_similarity(model, ds);
  Report r;
  r.row("report", "similarity");
  r.row("model", o.model);
  r.row("dataset", o.dataset);
  r.row("rho", res.rho);
  r.row("used", res.used);
  r.row("oov", res.oov);
  r.row("total", ds.pairs.size());
  emit(r, report_path, out);
}

inline void run_eval_analogy(const EvalAnalogyOptions& o, const std::string& report_path, std::ostream& out) {
  require_file("--model", o.model);
  const auto ds = load_analogy(o.dataset, o.format);
  const auto model = load_model<Real>(o.model);
  const auto res = eval_analogy(model, ds);
  Report r;
  r.row("report", "analogy");
  r.row("model", o.model);
  r.row("dataset", o.dataset);
  r.row("category", "name", "accuracy", "correct", "attempted", "oov");
  for (const auto& c : res.categories) r.row("category", c.name, c.accuracy(), c.correct, c.attempted, c.oov);
  r.row("micro", res.micro);
  r.row("macro", res.macro);
  r.row("correct", res.correct);
  r.row("attempted", res.attempted);
  r.row("oov", res.oov);
  r.row("total", ds.question_count());
  emit(r, report_path, out);
}

inline void run_map(const MapOptions& o, const std::string& report_path, std::ostream& out) {
  require_file("--source", o.source);
  require_file("--target", o.target);
  require_file("--train-dict", o.train_dict);
  require_file("--test-dict", o.test_dict);
  const auto src = load_model<Real>(o.source);
  const auto tgt = load_model<Real>(o.target);
  const auto res = xmap::eval_mapping(src, tgt, xmap::load_dictionary(o.train_dict), xmap::load_dictionary(o.test_dict), o.k);
  std::string chain;
  for (auto s : res.trace) chain += (chain.empty() ? "" : ",") + std::string(xmap::step_name(s));
  Report r;
  r.row("report", "mapping");
  r.row("source", o.source);
  r.row("target", o.target);
  r.row("normalization", chain);
  r.row("train_pairs", res.train_pairs);
  r.row("train_oov", res.train_oov);
  r.row("test_sources", res.test_sources);
  r.row("test_oov", res.test_oov);
  for (const auto& [k, p] : res.precision_at) r.row("p@" + std::to_string(k), p);
  emit(r, report_path, out);
}

inline void run_tag_train(const TagTrainOptions& o, const std::string& report_path, std::ostream& out) {
  require_file("--embeddings", o.embeddings);
  require_file("--train", o.train);
  const tagger::WordTable<Real> words(load_model<Real>(o.embeddings));
  const auto corpus = tagger::load_conll(o.train, o.label_column);
  std::vector<tagger::EpochStats> history;
  const auto params = tagger::train_tagger<Real>(corpus, words, o.config, &history);
  tagger::save_params(params, o.out);
  Report r;
  r.row("report", "tag-train");
  r.row("params", o.out);
  r.row("sentences", corpus.sentences.size());
  r.row("tokens", corpus.token_count());
  r.row("labels", corpus.labels.size());
  for (std::size_t e = 0; e < history.size(); ++e) r.row("epoch", e + 1, history[e].mean_loss, history[e].train_accuracy);
  r.row("train_accuracy", tagger::evaluate_tagger(params, corpus, words));
  emit(r, report_path, out);
}

inline void run_tag_eval(const TagEvalOptions& o, const std::string& report_path, std::ostream& out) {
  require_file("--embeddings", o.embeddings);
  require_file("--params", o.params);
  require_file("--test", o.test);
  const tagger::WordTable<Real> words(load_model<Real>(o.embeddings));
  const auto params = tagger::load_params<Real>(o.params);
  if (params.dim != words.dim()) throw ConfigError("tagger parameters and embeddings differ in dimension");
  const auto corpus = tagger::load_conll(o.test, o.label_column, &params.labels);
  Report r;
  r.row("report", "tag-eval");
  r.row("test", o.test);
  r.row("tokens", corpus.token_count());
  r.row("accuracy", tagger::evaluate_tagger(params, corpus, words));
  emit(r, report_path, out);
}

inline void run_compare(const CompareOptions& o, const std::string& report_path, std::ostream& out) {
  if (o.similarity.empty() && o.analogy.empty()) throw ConfigError("compare needs --similarity and/or --analogy");
  std::optional<SimilarityDataset> sim;
  std::optional<AnalogyDataset> ana;
  if (!o.similarity.empty()) {
    require_file("--similarity", o.similarity);
    sim = load_similarity(o.similarity, similarity_columns(o.columns, o.header));
  }
  if (!o.analogy.empty()) ana = load_analogy(o.analogy, o.format);
  Report r;
  r.row("report", "compare");
  r.row("model", "rho", "sim_used", "sim_oov", "analogy_micro", "analogy_macro", "analogy_attempted", "analogy_oov");
  for (const auto& path : o.models) {
    require_file("--models", path);
    const auto model = load_model<Real>(path);
    std::string rho = "-", used = "-", soov = "-", micro = "-", macro = "-", att = "-", aoov = "-";
    auto fixed = [](double v) {
      std::ostringstream s;
      s << std::fixed << std::setprecision(6) << v;
      return s.str();
    };
    if (sim) {
      const auto s = eval_similarity(model, *sim);
      rho = fixed(s.rho);
      used = std::to_string(s.used);
      soov = std::to_string(s.oov);
    }
    if (ana) {
      const auto a = eval_analogy(model, *ana);
      micro = fixed(a.micro);
      macro = fixed(a.macro);
      att = std::to_string(a.attempted);
      aoov = std::to_string(a.oov);
    }
    r.row(path, rho, used, soov, micro, macro, att, aoov);
  }
  emit(r, report_path, out);
}

// Entry point shared by the mglab binary and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"mglab: subword embedding training and evaluation"};
  app.require_subcommand(1);
  std::string report_path;

  TrainOptions train_o;
  auto* train_cmd = app.add_subcommand("train", "train a sg, ft or morph embedding model");
  train_cmd->add_option("--model", train_o.kind, "model kind")->required()->check(CLI::IsMember({"sg", "ft", "morph"}));
  train_cmd->add_option("--corpus", train_o.corpus, "UTF-8 text files, one sentence per line")->required();
  train_cmd->add_option("--lexicon", train_o.lexicon, "morpheme lexicon TSV (morph only)");
  train_cmd->add_option("--out", train_o.out, "checkpoint path")->required();
  train_cmd->add_option("--vectors", train_o.vectors, "also write composed vectors in word2vec text format");
  train_cmd->add_option("--vocab-out", train_o.vocab_out, "write the vocabulary as word<TAB>count");
  train_cmd->add_option("--dim", train_o.config.dim)->capture_default_str();
  train_cmd->add_option("--window", train_o.config.window)->capture_default_str();
  train_cmd->add_option("--negatives", train_o.config.negatives)->capture_default_str();
  train_cmd->add_option("--epochs", train_o.config.epochs)->capture_default_str();
  train_cmd->add_option("--lr", train_o.config.lr0)->capture_default_str();
  train_cmd->add_option("--subsample", train_o.config.subsample)->capture_default_str();
  train_cmd->add_option("--min-count", train_o.config.min_count)->capture_default_str();
  train_cmd->add_option("--max-vocab", train_o.config.max_vocab)->capture_default_str();
  train_cmd->add_option("--minn", train_o.minn)->capture_default_str();
  train_cmd->add_option("--maxn", train_o.maxn)->capture_default_str();
  train_cmd->add_option("--buckets", train_o.buckets)->capture_default_str();
  train_cmd->add_option("--seed", train_o.config.seed)->capture_default_str();
  train_cmd->add_option("--workers", train_o.config.workers)->capture_default_str();
  train_cmd->add_option("--table-size", train_o.config.negative_table_size)->capture_default_str();
  train_cmd->add_option("--log-interval", train_o.config.log_interval)->capture_default_str();
  train_cmd->add_option("--report", report_path);

  EvalSimOptions sim_o;
  auto* sim_cmd = app.add_subcommand("eval-sim", "Spearman correlation on a word similarity dataset");
  sim_cmd->add_option("--model", sim_o.model, "checkpoint or word2vec text file")->required();
  sim_cmd->add_option("--dataset", sim_o.dataset)->required();
  sim_cmd->add_option("--columns", sim_o.columns, "word1,word2,score column indices")->delimiter(',')->capture_default_str();
  sim_cmd->add_flag("--header", sim_o.header, "skip the first line");
  sim_cmd->add_option("--report", report_path);

  EvalAnalogyOptions ana_o;
  auto* ana_cmd = app.add_subcommand("eval-analogy", "3CosAdd analogy accuracy");
  ana_cmd->add_option("--model", ana_o.model)->required();
  ana_cmd->add_option("--dataset", ana_o.dataset, "Google file, BATS file or BATS directory")->required();
  ana_cmd->add_option("--format", ana_o.format)->check(CLI::IsMember({"google", "bats"}))->capture_default_str();
  ana_cmd->add_option("--report", report_path);

  MapOptions map_o;
  auto* map_cmd = app.add_subcommand("map", "supervised orthogonal mapping and translation precision@k");
  map_cmd->add_option("--source", map_o.source)->required();
  map_cmd->add_option("--target", map_o.target)->required();
  map_cmd->add_option("--train-dict", map_o.train_dict)->required();
  map_cmd->add_option("--test-dict", map_o.test_dict)->required();
  map_cmd->add_option("--k", map_o.k)->delimiter(',')->capture_default_str();
  map_cmd->add_option("--report", report_path);

  TagTrainOptions tt_o;
  auto* tt_cmd = app.add_subcommand("tag-train", "train the window tagger on CoNLL data");
  tt_cmd->add_option("--embeddings", tt_o.embeddings)->required();
  tt_cmd->add_option("--train", tt_o.train)->required();
  tt_cmd->add_option("--out", tt_o.out)->required();
  tt_cmd->add_option("--label-column", tt_o.label_column, "1 = POS, 2 = chunk")->check(CLI::Range(1, 2))->capture_default_str();
  tt_cmd->add_option("--window", tt_o.config.window)->capture_default_str();
  tt_cmd->add_option("--hidden", tt_o.config.hidden)->capture_default_str();
  tt_cmd->add_option("--epochs", tt_o.config.epochs)->capture_default_str();
  tt_cmd->add_option("--lr", tt_o.config.lr)->capture_default_str();
  tt_cmd->add_option("--seed", tt_o.config.seed)->capture_default_str();
  tt_cmd->add_option("--report", report_path);

  TagEvalOptions te_o;
  auto* te_cmd = app.add_subcommand("tag-eval", "token accuracy of a trained tagger");
  te_cmd->add_option("--embeddings", te_o.embeddings)->required();
  te_cmd->add_option("--params", te_o.params)->required();
  te_cmd->add_option("--test", te_o.test)->required();
  te_cmd->add_option("--label-column", te_o.label_column)->check(CLI::Range(1, 2))->capture_default_str();
  te_cmd->add_option("--report", report_path);

  CompareOptions cmp_o;
  auto* cmp_cmd = app.add_subcommand("compare", "similarity and analogy table across models");
  cmp_cmd->add_option("--models", cmp_o.models)->required();
  cmp_cmd->add_option("--similarity", cmp_o.similarity);
  cmp_cmd->add_option("--columns", cmp_o.columns)->delimiter(',')->capture_default_str();
  cmp_cmd->add_flag("--header", cmp_o.header);
  cmp_cmd->add_option("--analogy", cmp_o.analogy);
  cmp_cmd->add_option("--format", cmp_o.format)->check(CLI::IsMember({"google", "bats"}))->capture_default_str();
  cmp_cmd->add_option("--report", report_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  auto* cmd = app.get_subcommands().front();
  err << "# " << cmd->get_name() << " resolved configuration\n";
  std::istringstream config(cmd->config_to_str(true, false));
  for (std::string line; std::getline(config, line);) {
    if (!line.empty()) err << "# " << line << '\n';
  }

  try {
    if (cmd == train_cmd) {
      run_train(train_o, report_path, out, err);
    } else if (cmd == sim_cmd) {
      run_eval_sim(sim_o, report_path, out);
    } else if (cmd == ana_cmd) {
      run_eval_analogy(ana_o, report_path, out);
    } else if (cmd == map_cmd) {
      run_map(map_o, report_path, out);
    } else if (cmd == tt_cmd) {
      run_tag_train(tt_o, report_path, out);
    } else if (cmd == te_cmd) {
      run_tag_eval(te_o, report_path, out);
    } else {
      run_compare(cmp_o, report_path, out);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IngestError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}

}  // namespace mglab::cli

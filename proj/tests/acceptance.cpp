// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "analogy_oracle.hpp"
#include "cli_harness.hpp"
#include "gradcheck.hpp"
#include "mglab/eval.hpp"
#include "mglab/xmap.hpp"
#include "random_orthogonal.hpp"
#include "spearman_oracle.hpp"
#include "test_util.hpp"

namespace {

using namespace mglab;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void sgns_gradient_check(Outcome& o) {
  const auto start = Clock::now();
  std::mt19937_64 rng(20190601);
  double worst = 0;
  for (int i = 0; i < 200; ++i) worst = std::max(worst, testing::sgns_gradient_error(testing::random_sgns_instance(rng)));
  const double t = seconds_since(start);
  o.detail << "instances=200 max_rel_err=" << worst << " time=" << t << "s";
  o.require(worst < testing::kGradTolerance, "max relative error < 1e-4");
  o.require(t < 10, "runtime < 10 s");
}

void tagger_gradient_check(Outcome& o) {
  const auto start = Clock::now();
  std::mt19937_64 rng(20190602);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    worst = std::max(worst, testing::tagger_gradient_error(testing::random_tagger_instance(rng)));
  }
  const double t = seconds_since(start);
  o.detail << "instances=100 max_rel_err=" << worst << " time=" << t << "s";
  o.require(worst < testing::kGradTolerance, "max relative error < 1e-4");
  o.require(t < 10, "runtime < 10 s");
}

void skipgram_reduction(Outcome& o) {
  std::size_t pairs = 0, mismatches = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const std::size_t v = 40, d = 3 + 7 * seed;
    for (int precision = 0; precision < 2; ++precision) {
      auto check = [&]<typename Real>(Real) {
        EmbeddingModel<Real> m(testing::numbered_vocab(v), WholeWord{}, d);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g;
        for (auto& x : m.input().data()) x = static_cast<Real>(g(rng));
        for (auto& x : m.output().data()) x = static_cast<Real>(g(rng));
        for (WordId c = 0; c < v; ++c) {
          for (WordId j = 0; j < v; ++j) {
            Real plain{0};
            for (std::size_t k = 0; k < d; ++k) plain += m.input()(c, k) * m.output()(j, k);
            ++pairs;
            mismatches += m.score(c, j) != plain;
          }
        }
      };
      if (precision == 0) {
        check(float{});
      } else {
        check(double{});
      }
    }
  }
  o.detail << "pairs=" << pairs << " mismatches=" << mismatches;
  o.require(mismatches == 0, "exact equality");
}

void procrustes_recovery(Outcome& o) {
  std::mt19937_64 rng(20190604);
  double worst_w = 0, worst_ortho = 0;
  for (int i = 0; i < 50; ++i) {
    const Eigen::MatrixXd x = testing::random_gaussian(rng, 100, 20);
    const Eigen::MatrixXd r = testing::random_orthogonal(rng, 20);
    const Eigen::MatrixXd w = xmap::procrustes(x, x * r);
    worst_w = std::max(worst_w, (w - r).norm());
    worst_ortho = std::max(worst_ortho, (w.transpose() * w - Eigen::MatrixXd::Identity(20, 20)).norm());
  }

  // Identity dictionary between a model and its rotated copy.
  const Eigen::MatrixXd x = testing::random_gaussian(rng, 100, 20);
  const Eigen::MatrixXd y = x * testing::random_orthogonal(rng, 20);
  auto model_of = [](const Eigen::MatrixXd& rows) {
    EmbeddingModel<double> m(testing::numbered_vocab(static_cast<std::size_t>(rows.rows())), WholeWord{}, 20);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      for (Eigen::Index j = 0; j < rows.cols(); ++j) m.input()(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = rows(i, j);
    }
    return m;
  };
  xmap::BilingualDictionary train, test;
  for (int i = 0; i < 100; ++i) {
    auto& dict = i < 70 ? train : test;
    dict.entries.emplace_back("w" + std::to_string(i), "w" + std::to_string(i));
  }
  const auto res = xmap::eval_mapping(model_of(x), model_of(y), train, test, {1});
  const double p1 = res.precision_at.at(1);
  o.detail << "instances=50 max|W-R|=" << worst_w << " max|WtW-I|=" << worst_ortho << " p@1=" << p1;
  o.require(worst_w < 1e-8, "||W-R||_F < 1e-8");
  o.require(worst_ortho < 1e-8, "||W^T W - I||_F < 1e-8");
  o.require(p1 == 1.0, "p@1 == 1");
}

void spearman_oracle(Outcome& o) {
  std::mt19937_64 rng(20190605);
  double worst = 0, min_tie_share = 1;
  int instances = 0;
  while (instances < 100) {
    std::uniform_int_distribution<std::size_t> len(10, 60);
    const std::size_t n = len(rng);
    // Few distinct levels guarantee a heavy share of tied values.
    std::uniform_int_distribution<int> level(0, static_cast<int>(n / 4));
    std::vector<double> xs(n), ys(n);
    for (auto& v : xs) v = level(rng) * 0.25;
    for (auto& v : ys) v = level(rng) - 3.0;
    auto tie_share = [](const std::vector<double>& v) {
      std::size_t tied = 0;
      for (double a : v) tied += std::count(v.begin(), v.end(), a) > 1;
      return static_cast<double>(tied) / static_cast<double>(v.size());
    };
    const double share = std::min(tie_share(xs), tie_share(ys));
    if (share < 0.3) continue;
    if (std::adjacent_find(xs.begin(), xs.end(), std::not_equal_to<>()) == xs.end() ||
        std::adjacent_find(ys.begin(), ys.end(), std::not_equal_to<>()) == ys.end()) {
      continue;
    }
    min_tie_share = std::min(min_tie_share, share);
    worst = std::max(worst, std::abs(spearman(xs, ys) - testing::brute_force_spearman(xs, ys)));
    ++instances;
  }
  using V = std::vector<double>;
  const double id = spearman(V{1, 2, 3, 4, 5}, V{1, 2, 3, 4, 5});
  const double rev = spearman(V{1, 2, 3, 4, 5}, V{5, 4, 3, 2, 1});
  const double tie = spearman(V{1, 2, 3}, V{1, 1, 2});
  o.detail << "instances=100 min_tie_share=" << min_tie_share << " max_diff=" << worst << " id=" << id << " rev=" << rev
           << " tie=" << tie;
  o.require(worst <= 1e-12, "oracle agreement within 1e-12");
  o.require(id == 1.0 && rev == -1.0, "identity and reversal");
  o.require(std::abs(tie - 0.866025) <= 1e-6, "tie case 0.866025");
}

void analogy_oracle(Outcome& o) {
  std::mt19937_64 rng(20190606);
  std::size_t queries = 0, mismatches = 0;
  for (int vocab = 0; vocab < 100; ++vocab) {
    std::uniform_int_distribution<std::size_t> vsize(4, 50), dsize(1, 8);
    const std::size_t v = vsize(rng), d = dsize(rng);
    std::normal_distribution<double> g;
    std::vector<std::vector<double>> rows(v, std::vector<double>(d));
    EmbeddingModel<double> m(testing::numbered_vocab(v), WholeWord{}, d);
    for (std::size_t i = 0; i < v; ++i) {
      for (std::size_t k = 0; k < d; ++k) m.input()(i, k) = rows[i][k] = g(rng);
    }
    const NormalizedEmbeddings<double> emb(m);
    std::uniform_int_distribution<WordId> pick(0, static_cast<WordId>(v - 1));
    for (int q = 0; q < 20; ++q) {
      const WordId a = pick(rng), b = pick(rng), c = pick(rng);
      ++queries;
      mismatches += emb.solve(a, b, c) != testing::brute_force_analogy(rows, a, b, c);
    }
  }
  std::vector<std::pair<std::string, Count>> entries{{"a", 1}, {"b", 1}, {"c", 1}, {"t", 1}};
  EmbeddingModel<double> m(Vocabulary::from_entries(entries), WholeWord{}, 4);
  const double r = 1 / std::sqrt(2.0);
  const double rows[4][4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, r, r, 0}};
  for (std::size_t i = 0; i < 4; ++i) std::copy(rows[i], rows[i] + 4, m.input().row(i).begin());
  const auto answer = solve_analogy(m, "a", "b", "c");
  o.detail << "vocabularies=100 queries=" << queries << " mismatches=" << mismatches
           << " example=" << answer.value_or("<none>");
  o.require(mismatches == 0, "exhaustive oracle agreement");
  o.require(answer == std::optional<std::string>("t"), "constructed example resolves to t");
}

void negative_table_share(Outcome& o) {
  const auto vocab = Vocabulary::from_entries({{"a", 8}, {"b", 1}});
  const auto table = build_negative_table(vocab, 0.75, 10000000);
  const auto entries = table.entries();
  const double share = static_cast<double>(std::count(entries.begin(), entries.end(), WordId{0})) /
                       static_cast<double>(entries.size());
  const double oracle = std::pow(8.0, 0.75) / (std::pow(8.0, 0.75) + 1);
  o.detail << "length=" << entries.size() << " share=" << share << " oracle=" << oracle;
  o.require(entries.size() == 10000000, "table length 1e7");
  o.require(std::abs(share - oracle) <= 1e-4, "share within 1e-4 of oracle");
  o.require(std::abs(share - 0.8263) <= 1e-4, "share 0.8263 +- 1e-4");
}

void hash_conformance(Outcome& o) {
  const std::pair<const char*, std::uint32_t> vectors[] = {
      {"", 0x811C9DC5u}, {"a", 0xE40C292Cu}, {"b", 0xE70C2DE5u}, {"foo", 0xA9F37ED7u}, {"foobar", 0xBF9CF968u}};
  constexpr std::size_t full = std::size_t{1} << 32;
  int bad = 0;
  for (const auto& [text, expected] : vectors) {
    bad += hash_subword(text, full) != expected;
    bad += hash_subword(text, 2000000) != expected % 2000000;
  }
  o.detail << "vectors=5 mismatches=" << bad;
  o.require(bad == 0, "FNV-1a 32-bit test vectors");
}

TrainConfig desk_config() {
  TrainConfig c;
  c.dim = 32;
  c.epochs = 5;
  c.workers = 1;
  c.seed = 2019;
  return c;
}

SegmentationStrategy desk_strategy(const std::string& kind) {
  if (kind == "sg") return WholeWord{};
  if (kind == "ft") return CharNgrams{};
  return load_morph_lexicon(testing::data_path("desk/lexicon.tsv"));
}

void training_sanity(Outcome& o) {
  const std::vector<std::string> corpus{testing::data_path("desk/corpus.txt")};
  for (const std::string kind : {"sg", "ft", "morph"}) {
    const auto strategy = desk_strategy(kind);
    const auto start = Clock::now();
    TrainReport first;
    const auto a = train<float>(corpus, strategy, desk_config(), &first);
    const double t = seconds_since(start);
    TrainReport second;
    const auto b = train<float>(corpus, strategy, desk_config(), &second);
    const bool same = a.input() == b.input() && a.output() == b.output() &&
                      first.final_loss_ema == second.final_loss_ema;
    o.detail << kind << "(time=" << t << "s ema " << first.initial_loss_ema << "->" << first.final_loss_ema
             << " reproducible=" << (same ? "yes" : "no") << ") ";
    o.require(t < 300, kind + " under 5 min");
    o.require(first.final_loss_ema < first.initial_loss_ema, kind + " final EMA < initial EMA");
    o.require(a.all_finite() && std::isfinite(first.final_loss_ema), kind + " no NaN");
    o.require(same, kind + " bit-reproducible");
  }
}

void end_to_end(Outcome& o) {
  testing::TempDir dir;
  const auto corpus = testing::data_path("desk/corpus.txt");
  const auto lexicon = testing::data_path("desk/lexicon.tsv");
  const auto similarity = testing::data_path("desk/similarity.tsv");
  const auto analogy = testing::data_path("desk/analogy.txt");
  const auto sim_size = load_similarity(similarity, {0, 1, 3, true}).pairs.size();
  const auto ana_size = load_google_analogy(analogy).question_count();
  o.detail << "datasets(sim=" << sim_size << " analogy=" << ana_size << ") ";
  o.require(sim_size == 30 && ana_size == 20, "toy datasets are 30 pairs and 20 quadruples");

  auto train_cli = [&](const std::string& kind, const std::string& lex, const std::string& out) {
    std::vector<std::string> args{"train", "--model", kind, "--corpus", corpus, "--out", out, "--dim", "32", "--epochs", "5",
                                  "--seed", "2019", "--workers", "1"};
    if (!lex.empty()) {
      args.push_back("--lexicon");
      args.push_back(lex);
    }
    return testing::run_cli(args);
  };
  auto as_count = [](const std::string& s) { return s.empty() ? std::size_t{0} : std::stoul(s); };
  for (const std::string kind : {"sg", "ft", "morph"}) {
    const auto model = dir.file(kind + ".bin");
    const auto tr = train_cli(kind, kind == "morph" ? lexicon : "", model);
    o.require(tr.code == 0, kind + " train exit 0");
    const auto sim = testing::run_cli({"eval-sim", "--model", model, "--dataset", similarity, "--header"});
    const auto ana = testing::run_cli({"eval-analogy", "--model", model, "--dataset", analogy});
    o.require(sim.code == 0 && ana.code == 0, kind + " eval exit 0");
    const auto s_used = as_count(testing::report_field(sim.out, "used"));
    const auto s_oov = as_count(testing::report_field(sim.out, "oov"));
    const auto a_att = as_count(testing::report_field(ana.out, "attempted"));
    const auto a_oov = as_count(testing::report_field(ana.out, "oov"));
    o.detail << kind << "(rho=" << testing::report_field(sim.out, "rho") << " used+oov=" << s_used + s_oov
             << " micro=" << testing::report_field(ana.out, "micro") << " attempted+oov=" << a_att + a_oov << ") ";
    o.require(s_used + s_oov == sim_size, kind + " similarity accounting");
    o.require(a_att + a_oov == ana_size, kind + " analogy accounting");
  }

  const auto empty_lexicon = dir.write("empty.tsv", "");
  const auto morph_empty = dir.file("morph-empty.bin");
  o.require(train_cli("morph", empty_lexicon, morph_empty).code == 0, "empty-lexicon morph train exit 0");
  const auto sg = load_model<float>(dir.file("sg.bin"));
  const auto me = load_model<float>(morph_empty);
  const bool identical = sg.composed_matrix() == me.composed_matrix();
  o.detail << "empty-lexicon morph == sg: " << (identical ? "yes" : "no");
  o.require(identical, "empty-lexicon morph composed vectors equal sg");
}

void format_round_trips(Outcome& o) {
  testing::TempDir dir;
  std::vector<std::string> words;
  for (int i = 0; i < 60; ++i) words.push_back("w" + std::to_string(i) + (i % 3 ? "" : "ü"));
  std::vector<std::pair<std::string, Count>> entries;
  for (std::size_t i = 0; i < words.size(); ++i) entries.emplace_back(words[i], 100 - i);
  EmbeddingModel<float> m(Vocabulary::from_entries(entries), CharNgrams{3, 5, 500}, 12);
  std::mt19937_64 rng(11);
  std::normal_distribution<float> g;
  for (auto& x : m.input().data()) x = g(rng);
  for (auto& x : m.output().data()) x = g(rng);

  const auto first = dir.file("a.vec"), second = dir.file("b.vec");
  save_text(m, first);
  save_text(load_model<float>(first), second);
  const bool text_same = testing::slurp(first) == testing::slurp(second) && !testing::slurp(first).empty();

  const auto ckpt = dir.file("m.bin");
  save_checkpoint(m, ckpt);
  const auto back = load_checkpoint<float>(ckpt);
  const bool ckpt_same = back.input() == m.input() && back.output() == m.output() && back.vocab() == m.vocab();

  const auto bats = dir.write("E01.txt", "dog\tdogs/doggies\ncat\tcats\n");
  const auto quads = load_bats(bats).question_count();
  o.detail << "word2vec byte-identical=" << (text_same ? "yes" : "no") << " checkpoint exact=" << (ckpt_same ? "yes" : "no")
           << " bats quadruples=" << quads;
  o.require(text_same, "word2vec save-load-save byte-identical");
  o.require(ckpt_same, "checkpoint matrices exact");
  o.require(quads == 2, "2-pair BATS file gives 2 quadruples");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"sgns gradient check", sgns_gradient_check},
      {"tagger gradient check", tagger_gradient_check},
      {"skipgram reduction", skipgram_reduction},
      {"procrustes recovery", procrustes_recovery},
      {"spearman oracle", spearman_oracle},
      {"analogy oracle", analogy_oracle},
      {"negative table distribution", negative_table_share},
      {"hash conformance", hash_conformance},
      {"training sanity", training_sanity},
      {"end-to-end pipeline", end_to_end},
      {"format round-trips", format_round_trips},
  };
  std::ostringstream sink;
  warning_stream() = &sink;
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail.str()
              << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}

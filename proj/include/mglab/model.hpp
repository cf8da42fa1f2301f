#pragma once

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <utility>
#include <vector>

#include "mglab/corpus.hpp"
#include "mglab/error.hpp"
#include "mglab/matrix.hpp"
#include "mglab/segmenter.hpp"

namespace mglab {

inline constexpr std::size_t kDefaultDim = 300;

// Input matrix over subword rows (vocab rows first, then strategy rows) and
// output matrix over context-word rows. A word vector is the plain sum of
// the input rows of its subword set.
template <typename Real>
class EmbeddingModel {
  static_assert(std::is_floating_point_v<Real>);

 public:
  using real_type = Real;

  EmbeddingModel() = default;

  EmbeddingModel(Vocabulary vocab, SegmentationStrategy strategy, std::size_t dim)
      : vocab_(std::move(vocab)), strategy_(std::move(strategy)), dim_(dim) {
    if (dim_ == 0) throw ConfigError("embedding dimension must be positive");
    indexer_ = SubwordIndexer(strategy_, vocab_);
    input_ = Matrix<Real>(indexer_.input_rows(), dim_);
    output_ = Matrix<Real>(vocab_.size(), dim_);
  }

  // Input rows uniform in [-1/(2 dim), 1/(2 dim)], output rows zero.
  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Real bound = Real{1} / (Real{2} * static_cast<Real>(dim_));
    std::uniform_real_distribution<Real> uniform(-bound, bound);
    for (auto& x : input_.data()) x = uniform(rng);
    std::fill(output_.data().begin(), output_.data().end(), Real{0});
  }

  std::size_t dim() const noexcept { return dim_; }
  const Vocabulary& vocab() const noexcept { return vocab_; }
  const SegmentationStrategy& strategy() const noexcept { return strategy_; }
  const SubwordIndexer& indexer() const noexcept { return indexer_; }

  Matrix<Real>& input() noexcept { return input_; }
  const Matrix<Real>& input() const noexcept { return input_; }
  Matrix<Real>& output() noexcept { return output_; }
  const Matrix<Real>& output() const noexcept { return output_; }

  std::span<const std::uint32_t> subword_rows(WordId id) const noexcept { return indexer_.rows(id); }

  void compose_into(WordId id, std::span<Real> out) const {
    const auto rows = indexer_.rows(id);
    const auto first = input_.row(rows[0]);
    std::copy(first.begin(), first.end(), out.begin());
    for (std::size_t i = 1; i < rows.size(); ++i) vec::add(input_.row(rows[i]), out);
  }

  std::vector<Real> compose(WordId id) const {
    std::vector<Real> out(dim_);
    compose_into(id, out);
    return out;
  }
  std::vector<Real> compose(std::string_view word) const { return compose(vocab_.id(word)); }

  // s(context, center): composed center vector against the context output row.
  Real score(WordId center, WordId context) const {
    const auto h = compose(center);
    return vec::dot<Real>(h, output_.row(context));
  }
  Real score(std::string_view center, std::string_view context) const {
    return score(vocab_.id(center), vocab_.id(context));
  }

  // Composed vector of every vocabulary word, in id order.
  Matrix<Real> composed_matrix() const {
    Matrix<Real> out(vocab_.size(), dim_);
    for (std::size_t i = 0; i < vocab_.size(); ++i) compose_into(static_cast<WordId>(i), out.row(i));
    return out;
  }

  bool all_finite() const noexcept {
    auto finite = [](std::span<const Real> d) {
      for (Real x : d) {
        if (!std::isfinite(x)) return false;
      }
      return true;
    };
    return finite(input_.data()) && finite(output_.data());
  }

 private:
  Vocabulary vocab_;
  SegmentationStrategy strategy_;
  SubwordIndexer indexer_;
  std::size_t dim_ = 0;
  Matrix<Real> input_;
  Matrix<Real> output_;
};

// ---------------------------------------------------------------------------
// word2vec text format: "V dim" header, then "word v1 ... v_dim" per word,
// values printed with 6 significant digits via to_chars (locale-free).

namespace detail {

template <typename Real>
void append_real(std::string& buf, Real x) {
  std::array<char, 64> tmp;
  auto [ptr, ec] = std::to_chars(tmp.data(), tmp.data() + tmp.size(), x, std::chars_format::general, 6);
  buf.append(tmp.data(), ptr);
}

template <typename Real>
bool parse_real(std::string_view s, Real& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

inline bool parse_size(std::string_view s, std::size_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

template <typename Real>
void save_text(const Matrix<Real>& vectors, std::span<const std::string> words, std::ostream& out) {
  std::string buf;
  buf += std::to_string(words.size());
  buf += ' ';
  buf += std::to_string(vectors.cols());
  buf += '\n';
  out << buf;
  for (std::size_t i = 0; i < words.size(); ++i) {
    buf.clear();
    buf += words[i];
    for (Real x : vectors.row(i)) {
      buf += ' ';
      detail::append_real(buf, x);
    }
    buf += '\n';
    out << buf;
  }
}

template <typename Real>
void save_text(const EmbeddingModel<Real>& model, std::ostream& out) {
  save_text(model.composed_matrix(), model.vocab().words(), out);
}

template <typename Real>
void save_text(const EmbeddingModel<Real>& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  save_text(model, out);
  if (!out) throw Error("write failed: " + path);
}

// Rebuilds a whole-word model whose input rows are the stored vectors.
template <typename Real>
EmbeddingModel<Real> load_text(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header");
  const auto header = tokenize_view(line);
  std::size_t count = 0, dim = 0;
  if (header.size() != 2 || !detail::parse_size(header[0], count) || !detail::parse_size(header[1], dim) ||
      dim == 0) {
    throw ParseError(source, 1, "header must be 'V dim' with dim > 0");
  }
  std::vector<std::pair<std::string, Count>> entries;
  entries.reserve(count);
  std::vector<Real> values;
  values.reserve(count * dim);
  while (entries.size() < count && std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = tokenize_view(line);
    if (fields.size() != dim + 1) {
      throw ParseError(source, lineno,
                       "expected word and " + std::to_string(dim) + " values, got " +
                           std::to_string(fields.size()) + " fields");
    }
    for (std::size_t j = 1; j <= dim; ++j) {
      Real x{};
      if (!detail::parse_real(fields[j], x)) throw ParseError(source, lineno, "bad value '" + std::string(fields[j]) + "'");
      values.push_back(x);
    }
    entries.emplace_back(std::string(fields[0]), 0);
  }
  if (entries.size() != count) throw ParseError(source, lineno, "file ends before " + std::to_string(count) + " rows");
  Vocabulary vocab;
  try {
    vocab = Vocabulary::from_entries(std::move(entries));
  } catch (const ConfigError& e) {
    throw ParseError(source, 0, e.what());
  }
  EmbeddingModel<Real> model(std::move(vocab), WholeWord{}, dim);
  std::copy(values.begin(), values.end(), model.input().data().begin());
  return model;
}

template <typename Real>
EmbeddingModel<Real> load_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  return load_text<Real>(in, path);
}

// ---------------------------------------------------------------------------
// Native checkpoint. Little-endian, layout:
//   "MGLAB1"                       magic
//   u32 version (=1)
//   u8  scalar width in bytes (4 or 8)
//   u8  strategy kind (0 whole, 1 char n-grams, 2 morpheme lexicon)
//   u64 dim
//   u64 V, then V x { str word, u64 count }
//   strategy payload:
//     char n-grams: u64 n_min, u64 n_max, u64 bucket_count
//     lexicon:      u64 E, then E x { str word, u32 M, M x str morpheme }
//   u64 input rows, u64 output rows
//   input matrix, output matrix (row-major scalars)
// where str = u32 byte length + bytes.

inline constexpr std::string_view kCheckpointMagic = "MGLAB1";
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class BinWriter {
 public:
  explicit BinWriter(std::ostream& out) : out_(out) {}
  template <typename T>
  void pod(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void str(std::string_view s) {
    pod(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  template <typename T>
  void span(std::span<const T> d) {
    out_.write(reinterpret_cast<const char*>(d.data()), static_cast<std::streamsize>(d.size_bytes()));
  }

 private:
  std::ostream& out_;
};

class BinReader {
 public:
  BinReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}
  template <typename T>
  T pod() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    check();
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    std::string s(n, '\0');
    in_.read(s.data(), n);
    check();
    return s;
  }
  template <typename T>
  void span(std::span<T> d) {
    in_.read(reinterpret_cast<char*>(d.data()), static_cast<std::streamsize>(d.size_bytes()));
    check();
  }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, 0, what); }

 private:
  void check() const {
    if (!in_) fail("truncated checkpoint");
  }
  std::istream& in_;
  std::string source_;
};

template <typename Stored, typename Real>
void read_matrix(BinReader& r, Matrix<Real>& m) {
  if constexpr (std::is_same_v<Stored, Real>) {
    r.span(m.data());
  } else {
    std::vector<Stored> tmp(m.data().size());
    r.span(std::span<Stored>(tmp));
    std::copy(tmp.begin(), tmp.end(), m.data().begin());
  }
}

}  // namespace detail

template <typename Real>
void save_checkpoint(const EmbeddingModel<Real>& model, std::ostream& out) {
  detail::BinWriter w(out);
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  w.pod(kCheckpointVersion);
  w.pod(static_cast<std::uint8_t>(sizeof(Real)));
  w.pod(static_cast<std::uint8_t>(kind_of(model.strategy())));
  w.pod(static_cast<std::uint64_t>(model.dim()));
  const auto& vocab = model.vocab();
  w.pod(static_cast<std::uint64_t>(vocab.size()));
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    w.str(vocab.words()[i]);
    w.pod(static_cast<std::uint64_t>(vocab.counts()[i]));
  }
  if (const auto* ng = std::get_if<CharNgrams>(&model.strategy())) {
    w.pod(static_cast<std::uint64_t>(ng->n_min));
    w.pod(static_cast<std::uint64_t>(ng->n_max));
    w.pod(static_cast<std::uint64_t>(ng->bucket_count));
  } else if (const auto* lex = std::get_if<MorphLexicon>(&model.strategy())) {
    w.pod(static_cast<std::uint64_t>(lex->size()));
    for (const auto& [word, morphs] : lex->entries()) {
      w.str(word);
      w.pod(static_cast<std::uint32_t>(morphs.size()));
      for (const auto& m : morphs) w.str(m);
    }
  }
  w.pod(static_cast<std::uint64_t>(model.input().rows()));
  w.pod(static_cast<std::uint64_t>(model.output().rows()));
  w.span(model.input().data());
  w.span(model.output().data());
}

template <typename Real>
void save_checkpoint(const EmbeddingModel<Real>& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  save_checkpoint(model, out);
  if (!out) throw Error("write failed: " + path);
}

template <typename Real>
EmbeddingModel<Real> load_checkpoint(std::istream& in, const std::string& source = "<stream>") {
  detail::BinReader r(in, source);
  std::array<char, kCheckpointMagic.size()> magic{};
  in.read(magic.data(), magic.size());
  if (!in || std::string_view(magic.data(), magic.size()) != kCheckpointMagic) r.fail("not an MGLAB1 checkpoint");
  if (r.pod<std::uint32_t>() != kCheckpointVersion) r.fail("unsupported checkpoint version");
  const auto width = r.pod<std::uint8_t>();
  if (width != 4 && width != 8) r.fail("bad scalar width");
  const auto kind = r.pod<std::uint8_t>();
  const auto dim = r.pod<std::uint64_t>();
  const auto vsize = r.pod<std::uint64_t>();
  std::vector<std::pair<std::string, Count>> entries;
  entries.reserve(vsize);
  for (std::uint64_t i = 0; i < vsize; ++i) {
    auto word = r.str();
    const auto count = r.pod<std::uint64_t>();
    entries.emplace_back(std::move(word), count);
  }
  SegmentationStrategy strategy;
  switch (static_cast<StrategyKind>(kind)) {
    case StrategyKind::Whole: strategy = WholeWord{}; break;
    case StrategyKind::CharNgrams: {
      CharNgrams ng;
      ng.n_min = r.pod<std::uint64_t>();
      ng.n_max = r.pod<std::uint64_t>();
      ng.bucket_count = r.pod<std::uint64_t>();
      strategy = ng;
      break;
    }
    case StrategyKind::MorphLexicon: {
      const auto n = r.pod<std::uint64_t>();
      std::vector<std::pair<std::string, std::vector<std::string>>> lex;
      lex.reserve(n);
      for (std::uint64_t i = 0; i < n; ++i) {
        auto word = r.str();
        const auto m = r.pod<std::uint32_t>();
        std::vector<std::string> morphs;
        for (std::uint32_t j = 0; j < m; ++j) morphs.push_back(r.str());
        lex.emplace_back(std::move(word), std::move(morphs));
      }
      strategy = MorphLexicon::from_entries(lex);
      break;
    }
    default: r.fail("unknown strategy kind");
  }
  EmbeddingModel<Real> model(Vocabulary::from_entries(std::move(entries)), std::move(strategy), dim);
  const auto in_rows = r.pod<std::uint64_t>();
  const auto out_rows = r.pod<std::uint64_t>();
  if (in_rows != model.input().rows() || out_rows != model.output().rows()) r.fail("matrix shape mismatch");
  if (width == 4) {
    detail::read_matrix<float>(r, model.input());
    detail::read_matrix<float>(r, model.output());
  } else {
    detail::read_matrix<double>(r, model.input());
    detail::read_matrix<double>(r, model.output());
  }
  return model;
}

template <typename Real>
EmbeddingModel<Real> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  return load_checkpoint<Real>(in, path);
}

inline bool is_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::array<char, kCheckpointMagic.size()> magic{};
  in.read(magic.data(), magic.size());
  return in && std::string_view(magic.data(), magic.size()) == kCheckpointMagic;
}

// Loads either a checkpoint or a word2vec text file, by magic.
template <typename Real>
EmbeddingModel<Real> load_model(const std::string& path) {
  return is_checkpoint_file(path) ? load_checkpoint<Real>(path) : load_text<Real>(path);
}

}  // namespace mglab

#include "xner/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "xner/error.hpp"
#include "xner/text.hpp"

namespace xner {

Vocabulary::Vocabulary(std::vector<std::string> words) {
  words_.reserve(words.size());
  for (auto& w : words) {
    if (index_.find(w) != index_.end()) throw DataError("duplicate word in vocabulary: " + w);
    add(std::move(w));
  }
}

bool Vocabulary::add(std::string word) {
  if (index_.find(word) != index_.end()) return false;
  index_.emplace(word, words_.size());
  words_.push_back(std::move(word));
  return true;
}

std::optional<std::size_t> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> EmbeddingSet::lookup(std::string_view word) const {
  if (auto i = vocab.find(word)) return i;
  std::string lower = text::lowercase(word);
  if (lower != word) return vocab.find(lower);
  return std::nullopt;
}

namespace {

bool parse_size(std::string_view s, std::size_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

// Single-space separated per the file format; tolerate runs of spaces/tabs.
std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

EmbeddingSet read_embeddings(std::istream& in, const std::string& name, std::size_t max_vocab) {
  if (max_vocab == 0) throw ConfigError("max_vocab must be >= 1");
  EmbeddingSet e;
  std::vector<double> values;
  std::size_t dim = 0;
  std::size_t lineno = 0;
  std::string raw;
  while (e.vocab.size() < max_vocab && std::getline(in, raw)) {
    ++lineno;
    std::string_view line = text::chomp(raw);
    auto f = fields(line);
    if (f.empty()) continue;
    if (lineno == 1 && f.size() == 2) {
      std::size_t rows = 0, d = 0;
      if (parse_size(f[0], rows) && parse_size(f[1], d) && d > 0) {
        dim = d;
        continue;
      }
    }
    if (f.size() < 2) throw ParseError(name, lineno, "expected a word followed by vector values");
    std::size_t row_dim = f.size() - 1;
    if (dim == 0) dim = row_dim;
    if (row_dim != dim) {
      throw ParseError(name, lineno,
                       "expected " + std::to_string(dim) + " values, found " + std::to_string(row_dim));
    }
    std::string word(f[0]);
    if (!e.vocab.add(word)) throw ParseError(name, lineno, "duplicate word '" + word + "'");
    for (std::size_t k = 1; k < f.size(); ++k) {
      double x;
      if (!parse_double(f[k], x)) {
        throw ParseError(name, lineno, "non-numeric or non-finite value '" + std::string(f[k]) + "'");
      }
      values.push_back(x);
    }
  }
  if (e.vocab.empty()) throw DataError(name + ": no embedding rows");
  e.matrix = Eigen::Map<Matrix>(values.data(), static_cast<Eigen::Index>(e.vocab.size()),
                                static_cast<Eigen::Index>(dim));
  return e;
}

EmbeddingSet load_embeddings(const std::string& path, std::size_t max_vocab) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file " + path);
  return read_embeddings(in, path, max_vocab);
}

void write_embeddings(const EmbeddingSet& e, std::ostream& out) {
  out << e.size() << ' ' << e.dim() << '\n';
  char buf[32];
  for (std::size_t i = 0; i < e.size(); ++i) {
    out << e.vocab.word(i);
    for (std::size_t k = 0; k < e.dim(); ++k) {
      std::snprintf(buf, sizeof buf, " %.17g", e.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
      out << buf;
    }
    out << '\n';
  }
}

void save_embeddings(const EmbeddingSet& e, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  write_embeddings(e, out);
}

EmbeddingSet normalize_rows(const EmbeddingSet& e) {
  EmbeddingSet out = e;
  for (Eigen::Index i = 0; i < out.matrix.rows(); ++i) {
    double n = out.matrix.row(i).norm();
    if (!(n > 0.0)) throw DataError("cannot normalize zero-norm vector for word '" + e.vocab.word(static_cast<std::size_t>(i)) + "'");
    out.matrix.row(i) /= n;
  }
  out.normalized = true;
  return out;
}

double oov_bound(std::size_t dim) { return std::sqrt(3.0 / static_cast<double>(dim)); }

RowVector oov_vector(std::size_t dim, std::mt19937_64& rng) {
  double a = oov_bound(dim);
  std::uniform_real_distribution<double> u(-a, a);
  RowVector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = u(rng);
  return v;
}

EmbeddingSet project(const EmbeddingSet& e, const Matrix& map) {
  if (static_cast<std::size_t>(map.rows()) != e.dim()) {
    throw ConfigError("projection is " + std::to_string(map.rows()) + "-dimensional but embeddings are " +
                      std::to_string(e.dim()) + "-dimensional");
  }
  EmbeddingSet out;
  out.vocab = e.vocab;
  out.matrix = e.matrix * map;
  out.normalized = false;
  return out;
}

}  // namespace xner

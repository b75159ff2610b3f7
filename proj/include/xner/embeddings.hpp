#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace xner {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

/// Default vocabulary cap for both embedding roles.
inline constexpr std::size_t kDefaultMaxVocab = 100000;

/// Words in file (rank) order with a reverse index.
class Vocabulary {
 public:
  Vocabulary() = default;
  /// Throws DataError on a duplicate word.
  explicit Vocabulary(std::vector<std::string> words);

  /// Appends `word`; returns false (and leaves the vocabulary untouched) if present.
  bool add(std::string word);
  std::optional<std::size_t> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }

  const std::string& word(std::size_t i) const { return words_[i]; }
  const std::vector<std::string>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
};

/// Which pipeline stage consumes a set: translation (aligned, normalized)
/// or tagger (raw vectors, never fine-tuned).
enum class EmbeddingRole { translation, tagger };

/// A vocabulary with a V x d matrix. `normalized` records whether every row has
/// unit Euclidean norm. Immutable once built.
struct EmbeddingSet {
  Vocabulary vocab;
  Matrix matrix;
  bool normalized = false;

  std::size_t size() const { return vocab.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(matrix.cols()); }

  /// Exact match, then lowercase fallback.
  std::optional<std::size_t> lookup(std::string_view word) const;
};

/// Reads the word2vec text format: optional "<V> <d>" header, then
/// "<word> <v1> ... <vd>" rows. Keeps the first `max_vocab` rows.
/// Throws ParseError naming the offending line.
EmbeddingSet load_embeddings(const std::string& path, std::size_t max_vocab = kDefaultMaxVocab);
EmbeddingSet read_embeddings(std::istream& in, const std::string& name,
                             std::size_t max_vocab = kDefaultMaxVocab);

/// Writes with a header and %.17g values, which reload bit-for-bit.
void save_embeddings(const EmbeddingSet& e, const std::string& path);
void write_embeddings(const EmbeddingSet& e, std::ostream& out);

/// Pure; throws DataError naming the first zero-norm word.
EmbeddingSet normalize_rows(const EmbeddingSet& e);

/// Uniform on [-sqrt(3/dim), +sqrt(3/dim)] per component.
RowVector oov_vector(std::size_t dim, std::mt19937_64& rng);
double oov_bound(std::size_t dim);

/// Word -> row view consumed by the tagger: exact match, then lowercase.
/// Misses fall back to the tagger's own unknown-word vector.
class WordTable {
 public:
  WordTable() = default;
  explicit WordTable(EmbeddingSet set) : set_(std::move(set)) {}

  std::size_t dim() const { return set_.dim(); }
  std::optional<std::size_t> find(std::string_view word) const { return set_.lookup(word); }
  const EmbeddingSet& set() const { return set_; }

 private:
  EmbeddingSet set_;
};

/// Rows multiplied by `map` (d x d); used for the common-space view X' = XV.
EmbeddingSet project(const EmbeddingSet& e, const Matrix& map);

}  // namespace xner

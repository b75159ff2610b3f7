#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xner/embeddings.hpp"
#include "xner/similarity.hpp"

namespace xner {

enum class DictionarySource { provided_file, identical_strings, refinement_round };

/// Ordered (source index, target index) pairs. A source may appear with several
/// targets; each pair becomes its own row of X_D / Y_D.
struct SeedDictionary {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  DictionarySource source = DictionarySource::provided_file;
  std::size_t dropped = 0;  // file pairs discarded because a side was out of vocabulary

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

/// One pair per byte-identical string in both vocabularies, in source rank order.
/// Throws DataError when the vocabularies share no string.
SeedDictionary identical_strings_dictionary(const Vocabulary& src, const Vocabulary& tgt);

/// "src tgt" per line (tab or space); '#' lines ignored. Keeps in-vocabulary
/// pairs, deduplicates repeated pairs, and throws if nothing survives.
SeedDictionary load_dictionary(const std::string& path, const Vocabulary& src, const Vocabulary& tgt);
SeedDictionary read_dictionary(std::istream& in, const std::string& name, const Vocabulary& src,
                               const Vocabulary& tgt);

/// W = U V^T from the SVD Y_D^T X_D = U S V^T; W minimizes sum ||W x_i - y_i||^2
/// over orthogonal matrices.
struct ProcrustesSolution {
  Matrix w;
  Matrix u;
  Matrix v;
};

ProcrustesSolution solve_procrustes(const Matrix& xd, const Matrix& yd);

/// Sum of squared residuals ||W x_i - y_i||^2 over dictionary rows.
double procrustes_objective(const Matrix& w, const Matrix& xd, const Matrix& yd);

struct RefinementConfig {
  std::size_t rounds = 3;
  SimilarityMetric metric = SimilarityMetric::csls;
  std::size_t csls_k = 10;
  /// Restrict each round's mutual-NN search to the most frequent words.
  std::optional<std::size_t> max_rank;
};

/// Orthogonal factors and the projected spaces X' = XV, Y' = YU.
struct AlignmentModel {
  Matrix u;
  Matrix v;
  Matrix w;
  Matrix xp;
  Matrix yp;
  std::size_t round = 0;
  /// Seed size followed by the dictionary size of every refinement round.
  std::vector<std::size_t> dictionary_sizes;

  std::size_t dim() const { return static_cast<std::size_t>(u.rows()); }
  /// Recomputes xp and yp from (normalized) embeddings.
  void project(const Matrix& x, const Matrix& y);
};

/// Pairs (i, j) where j is i's best target and i is j's best source under
/// `metric`. Ties go to the lowest index. May be empty.
SeedDictionary mutual_nearest_neighbors(const Matrix& xp, const Matrix& yp, SimilarityMetric metric,
                                        std::size_t csls_k, std::optional<std::size_t> max_rank = std::nullopt);

using RoundCallback = std::function<void(std::size_t round, std::size_t dictionary_size)>;

/// Procrustes on the seed, then `cfg.rounds` rounds of mutual-NN dictionary
/// induction in the current shared space followed by a re-solve. Each round's
/// dictionary replaces the previous one.
AlignmentModel refine(const EmbeddingSet& x, const EmbeddingSet& y, const SeedDictionary& seed,
                      const RefinementConfig& cfg, const RoundCallback& on_round = {});

/// Text container: comment lines, "dim <d>", "round <k>", then U and V rows
/// in %.17g. Reloads exactly; xp/yp are not stored.
void write_alignment(const AlignmentModel& model, std::ostream& out,
                     const std::vector<std::string>& comments = {});
void save_alignment(const AlignmentModel& model, const std::string& path,
                    const std::vector<std::string>& comments = {});
AlignmentModel read_alignment(std::istream& in, const std::string& name);
AlignmentModel load_alignment(const std::string& path);

/// Frobenius norm of M M^T - I.
double orthogonality_error(const Matrix& m);

}  // namespace xner

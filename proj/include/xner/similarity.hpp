#pragma once

#include <cstddef>
#include <vector>

#include "xner/embeddings.hpp"

namespace xner {

/// Exact nearest-neighbour primitives over row-normalized matrices, where the
/// dot product is the cosine. All searches are full (no approximate index) and
/// break ties by the lowest index.

enum class SimilarityMetric { csls, cosine };

/// Mean of the `k` largest dot products of each query row against all keys.
std::vector<double> topk_mean_similarity(const Matrix& queries, const Matrix& keys, std::size_t k);

struct Match {
  std::size_t index = 0;
  double value = 0.0;  // the maximized quantity, scale * dot - penalty[index]
};

/// For each query row, argmax_j (scale * <q, k_j> - penalty[j]). An empty
/// penalty means zeros.
std::vector<Match> best_matches(const Matrix& queries, const Matrix& keys, double scale,
                                const std::vector<double>& penalty);

/// Neighbourhood statistics for cross-domain similarity local scaling.
/// r_src[i] is the mean cosine of source i to its K nearest targets and
/// r_tgt[j] the mean cosine of target j to its K nearest sources.
struct CslsIndex {
  std::vector<double> r_src;
  std::vector<double> r_tgt;
  std::size_t k = 10;
};

/// Throws ConfigError if k is 0 or exceeds either vocabulary.
CslsIndex build_csls_index(const Matrix& src, const Matrix& tgt, std::size_t k);

/// 2 cos(x_i, y_j) - r_src[i] - r_tgt[j].
double csls(std::size_t i, std::size_t j, const CslsIndex& index, const Matrix& src, const Matrix& tgt);

}  // namespace xner

#include "xner/similarity.hpp"

#include <algorithm>
#include <functional>
#include <string>

#include "xner/error.hpp"
#include "xner/parallel.hpp"

namespace xner {

namespace {

// Caps one query block at ~4M similarity entries (32 MB).
std::size_t block_rows(std::size_t keys) {
  constexpr std::size_t kBudget = std::size_t{1} << 22;
  return std::max<std::size_t>(1, std::min<std::size_t>(256, kBudget / std::max<std::size_t>(1, keys)));
}

void check_dims(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ConfigError("similarity search over mismatched dimensions " + std::to_string(a.cols()) + " and " +
                      std::to_string(b.cols()));
  }
}

}  // namespace

std::vector<double> topk_mean_similarity(const Matrix& queries, const Matrix& keys, std::size_t k) {
  check_dims(queries, keys);
  const auto n = static_cast<std::size_t>(queries.rows());
  const auto m = static_cast<std::size_t>(keys.rows());
  if (k == 0 || k > m) throw ConfigError("neighbourhood size " + std::to_string(k) + " out of range [1, " +
                                         std::to_string(m) + "]");
  std::vector<double> out(n);
  const std::size_t step = block_rows(m);
  parallel_for(n, step, [&](std::size_t begin, std::size_t end) {
    Matrix sims = queries.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin)) *
                  keys.transpose();
    std::vector<double> row(m);
    for (std::size_t r = 0; r < end - begin; ++r) {
      for (std::size_t j = 0; j < m; ++j) row[j] = sims(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
      std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end(), std::greater<>());
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += row[t];
      out[begin + r] = s / static_cast<double>(k);
    }
  });
  return out;
}

std::vector<Match> best_matches(const Matrix& queries, const Matrix& keys, double scale,
                                const std::vector<double>& penalty) {
  check_dims(queries, keys);
  const auto n = static_cast<std::size_t>(queries.rows());
  const auto m = static_cast<std::size_t>(keys.rows());
  if (!penalty.empty() && penalty.size() != m) throw ConfigError("penalty length does not match key count");
  std::vector<Match> out(n);
  if (m == 0) throw ConfigError("nearest-neighbour search over an empty key set");
  parallel_for(n, block_rows(m), [&](std::size_t begin, std::size_t end) {
    Matrix sims = queries.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin)) *
                  keys.transpose();
    for (std::size_t r = 0; r < end - begin; ++r) {
      Match best{0, 0.0};
      for (std::size_t j = 0; j < m; ++j) {
        double v = scale * sims(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
        if (!penalty.empty()) v -= penalty[j];
        if (j == 0 || v > best.value) best = {j, v};
      }
      out[begin + r] = best;
    }
  });
  return out;
}

CslsIndex build_csls_index(const Matrix& src, const Matrix& tgt, std::size_t k) {
  if (k == 0) throw ConfigError("CSLS neighbourhood size must be >= 1");
  if (k > static_cast<std::size_t>(tgt.rows()) || k > static_cast<std::size_t>(src.rows())) {
    throw ConfigError("CSLS neighbourhood size " + std::to_string(k) + " exceeds vocabulary size (" +
                      std::to_string(src.rows()) + " sources, " + std::to_string(tgt.rows()) + " targets)");
  }
  CslsIndex index;
  index.k = k;
  index.r_src = topk_mean_similarity(src, tgt, k);
  index.r_tgt = topk_mean_similarity(tgt, src, k);
  return index;
}

double csls(std::size_t i, std::size_t j, const CslsIndex& index, const Matrix& src, const Matrix& tgt) {
  double cos = src.row(static_cast<Eigen::Index>(i)).dot(tgt.row(static_cast<Eigen::Index>(j)));
  return 2.0 * cos - index.r_src[i] - index.r_tgt[j];
}

}  // namespace xner

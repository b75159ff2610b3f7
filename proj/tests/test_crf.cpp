#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "testing.hpp"
#include "xner/crf.hpp"
#include "xner/error.hpp"

using namespace xner;

namespace {

// Every label sequence of length n over L labels, in lexicographic order.
std::vector<std::vector<std::size_t>> all_paths(std::size_t n, std::size_t L) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(n, 0);
  for (;;) {
    out.push_back(cur);
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++cur[k] < L) break;
      cur[k] = 0;
      if (k == 0) return out;
    }
    if (n == 0) return out;
  }
}

double brute_score(const Matrix& em, const Matrix& tr, const std::vector<std::size_t>& y) {
  const std::size_t L = static_cast<std::size_t>(em.cols());
  double s = tr(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(y[0]));
  for (std::size_t i = 0; i < y.size(); ++i) {
    s += em(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(y[i]));
    if (i + 1 < y.size()) s += tr(static_cast<Eigen::Index>(y[i]), static_cast<Eigen::Index>(y[i + 1]));
  }
  return s + tr(static_cast<Eigen::Index>(y.back()), static_cast<Eigen::Index>(L + 1));
}

struct Brute {
  double log_z;
  std::vector<std::size_t> best;
};

Brute brute(const Matrix& em, const Matrix& tr) {
  const auto paths = all_paths(static_cast<std::size_t>(em.rows()), static_cast<std::size_t>(em.cols()));
  double mx = -std::numeric_limits<double>::infinity();
  Brute b{0.0, {}};
  std::vector<double> scores;
  for (const auto& p : paths) {
    const double s = brute_score(em, tr, p);
    scores.push_back(s);
    if (s > mx) {
      mx = s;
      b.best = p;
    }
  }
  double acc = 0.0;
  for (double s : scores) acc += std::exp(s - mx);
  b.log_z = mx + std::log(acc);
  return b;
}

}  // namespace

TEST(Crf, TwoEqualPaths) {
  Matrix em = Matrix::Zero(1, 2), tr = Matrix::Zero(4, 4);
  EXPECT_NEAR(crf::log_partition(em, tr), std::log(2.0), 1e-15);
}

TEST(Crf, UniformPotentialsNll) {
  Matrix em = Matrix::Zero(2, 2), tr = Matrix::Zero(4, 4);
  ad::Graph g;
  ad::Var loss = crf::nll(g.constant(em), g.constant(tr), {1, 0});
  EXPECT_NEAR(loss.scalar(), std::log(4.0), 1e-14);
  EXPECT_EQ(crf::viterbi_decode(em, tr), (std::vector<std::size_t>{0, 0}));
}

TEST(Crf, SingleLabelHasZeroLoss) {
  std::mt19937_64 rng(1);
  Matrix em = testutil::random_matrix(4, 1, rng), tr = testutil::random_matrix(3, 3, rng);
  ad::Graph g;
  EXPECT_NEAR(crf::nll(g.constant(em), g.constant(tr), {0, 0, 0, 0}).scalar(), 0.0, 1e-12);
}

TEST(Crf, FavouredPathIsDecoded) {
  Matrix em(2, 2), tr = Matrix::Zero(4, 4);
  em << 0, 5, 5, 0;
  EXPECT_EQ(crf::viterbi_decode(em, tr), (std::vector<std::size_t>{1, 0}));
}

TEST(Crf, MatchesEnumeration) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> pn(1, 5), pl(1, 4);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = pn(rng), L = pl(rng);
    Matrix em = testutil::random_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(L), rng, 2.0);
    Matrix tr = testutil::random_matrix(static_cast<Eigen::Index>(L + 2), static_cast<Eigen::Index>(L + 2), rng, 2.0);
    const Brute b = brute(em, tr);
    const double z = crf::log_partition(em, tr);
    EXPECT_LE(std::abs(z - b.log_z), 1e-9 * std::abs(b.log_z));
    EXPECT_EQ(crf::viterbi_decode(em, tr), b.best);

    ad::Graph g;
    ad::Var zv = crf::log_partition(g.constant(em), g.constant(tr));
    EXPECT_LE(std::abs(zv.scalar() - b.log_z), 1e-9 * std::abs(b.log_z));
    const auto& gold = b.best;
    ad::Var nll = crf::nll(g.constant(em), g.constant(tr), gold);
    EXPECT_NEAR(nll.scalar(), b.log_z - brute_score(em, tr, gold), 1e-9 * std::max(1.0, std::abs(b.log_z)));
    EXPECT_NEAR(crf::sequence_score(em, tr, gold), brute_score(em, tr, gold), 1e-12);
  }
}

TEST(Crf, GoldLabelOutOfRangeFails) {
  ad::Graph g;
  Matrix em = Matrix::Zero(2, 2), tr = Matrix::Zero(4, 4);
  EXPECT_THROW(crf::nll(g.constant(em), g.constant(tr), {0, 2}), DataError);
}

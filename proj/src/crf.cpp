#include "xner/crf.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "xner/error.hpp"

namespace xner::crf {

namespace {

std::size_t check_shapes(const Matrix& em, const Matrix& tr) {
  if (em.rows() < 1) throw std::invalid_argument("crf: empty sequence");
  const auto labels = static_cast<std::size_t>(em.cols());
  if (tr.rows() != em.cols() + 2 || tr.cols() != em.cols() + 2) {
    throw std::invalid_argument("crf: transitions must be " + std::to_string(labels + 2) + " square");
  }
  return labels;
}

double lse(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

double sequence_score(const Matrix& em, const Matrix& tr, const std::vector<std::size_t>& tags) {
  const std::size_t labels = check_shapes(em, tr);
  if (tags.size() != static_cast<std::size_t>(em.rows())) throw std::invalid_argument("crf: tag count mismatch");
  std::size_t prev = bos(labels);
  double s = 0.0;
  for (std::size_t t = 0; t < tags.size(); ++t) {
    if (tags[t] >= labels) throw DataError("crf: tag index " + std::to_string(tags[t]) + " outside tagset");
    s += tr(static_cast<Eigen::Index>(prev), static_cast<Eigen::Index>(tags[t]));
    s += em(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(tags[t]));
    prev = tags[t];
  }
  return s + tr(static_cast<Eigen::Index>(prev), static_cast<Eigen::Index>(eos(labels)));
}

double log_partition(const Matrix& em, const Matrix& tr) {
  const auto L = static_cast<Eigen::Index>(check_shapes(em, tr));
  const Eigen::Index B = L, E = L + 1;
  Eigen::RowVectorXd alpha = tr.block(B, 0, 1, L) + em.row(0);
  Eigen::RowVectorXd next(L);
  for (Eigen::Index t = 1; t < em.rows(); ++t) {
    for (Eigen::Index j = 0; j < L; ++j) {
      Eigen::RowVectorXd in = alpha + tr.block(0, j, L, 1).transpose();
      next(j) = lse(in) + em(t, j);
    }
    alpha = next;
  }
  Eigen::RowVectorXd fin = alpha + tr.block(0, E, L, 1).transpose();
  return lse(fin);
}

std::vector<std::size_t> viterbi_decode(const Matrix& em, const Matrix& tr) {
  const auto L = static_cast<Eigen::Index>(check_shapes(em, tr));
  const Eigen::Index n = em.rows();
  const Eigen::Index B = L, E = L + 1;
  Eigen::RowVectorXd delta = tr.block(B, 0, 1, L) + em.row(0);
  Eigen::RowVectorXd next(L);
  std::vector<std::vector<std::size_t>> back(static_cast<std::size_t>(n), std::vector<std::size_t>(L, 0));
  for (Eigen::Index t = 1; t < n; ++t) {
    for (Eigen::Index j = 0; j < L; ++j) {
      Eigen::Index best = 0;
      double best_v = delta(0) + tr(0, j);
      for (Eigen::Index i = 1; i < L; ++i) {
        const double v = delta(i) + tr(i, j);
        if (v > best_v) {
          best_v = v;
          best = i;
        }
      }
      next(j) = best_v + em(t, j);
      back[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] = static_cast<std::size_t>(best);
    }
    delta = next;
  }
  Eigen::Index last = 0;
  double best_v = delta(0) + tr(0, E);
  for (Eigen::Index j = 1; j < L; ++j) {
    const double v = delta(j) + tr(j, E);
    if (v > best_v) {
      best_v = v;
      last = j;
    }
  }
  std::vector<std::size_t> path(static_cast<std::size_t>(n));
  path.back() = static_cast<std::size_t>(last);
  for (std::size_t t = path.size() - 1; t > 0; --t) path[t - 1] = back[t][path[t]];
  return path;
}

ad::Var log_partition(ad::Var emissions, ad::Var transitions) {
  const auto L = static_cast<Eigen::Index>(check_shapes(emissions.value(), transitions.value()));
  const Eigen::Index n = emissions.rows();
  // Row j of `into` holds T[i -> j] over i, so adding alpha (a row over i)
  // and reducing row-wise gives the next alpha as a column.
  ad::Var into = ad::transpose(ad::slice(transitions, 0, L, 0, L));
  ad::Var alpha = ad::add(ad::slice(transitions, L, 1, 0, L), ad::row(emissions, 0));
  for (Eigen::Index t = 1; t < n; ++t) {
    ad::Var scores = ad::add(into, alpha);
    alpha = ad::add(ad::transpose(ad::log_sum_exp(scores)), ad::row(emissions, t));
  }
  ad::Var to_end = ad::transpose(ad::slice(transitions, 0, L, L + 1, 1));
  return ad::log_sum_exp(ad::add(alpha, to_end));
}

ad::Var nll(ad::Var emissions, ad::Var transitions, const std::vector<std::size_t>& gold) {
  const std::size_t labels = check_shapes(emissions.value(), transitions.value());
  if (gold.size() != static_cast<std::size_t>(emissions.rows())) {
    throw std::invalid_argument("crf: gold length differs from emission rows");
  }
  ad::Graph& g = *emissions.graph;
  ad::Tensor em_sel = ad::Tensor::Zero(emissions.rows(), emissions.cols());
  ad::Tensor tr_sel = ad::Tensor::Zero(transitions.rows(), transitions.cols());
  std::size_t prev = bos(labels);
  for (std::size_t t = 0; t < gold.size(); ++t) {
    if (gold[t] >= labels) throw DataError("crf: tag index " + std::to_string(gold[t]) + " outside tagset");
    em_sel(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(gold[t])) += 1.0;
    tr_sel(static_cast<Eigen::Index>(prev), static_cast<Eigen::Index>(gold[t])) += 1.0;
    prev = gold[t];
  }
  tr_sel(static_cast<Eigen::Index>(prev), static_cast<Eigen::Index>(eos(labels))) += 1.0;
  ad::Var gold_score = ad::add(ad::sum(ad::mul(emissions, g.constant(std::move(em_sel)))),
                               ad::sum(ad::mul(transitions, g.constant(std::move(tr_sel)))));
  return ad::add(log_partition(emissions, transitions), ad::scale(gold_score, -1.0));
}

}  // namespace xner::crf

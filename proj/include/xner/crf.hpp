#pragma once

#include <cstddef>
#include <vector>

#include "xner/autodiff.hpp"

/// Linear-chain CRF over L labels. Emissions are n x L. Transitions are
/// (L+2) x (L+2), indexed [from, to], with two extra states: BOS = L and
/// EOS = L+1. BOS only starts a sequence and EOS only ends it; emissions
/// never score either.
namespace xner::crf {

inline std::size_t bos(std::size_t labels) { return labels; }
inline std::size_t eos(std::size_t labels) { return labels + 1; }

/// sum_t e[t, y_t] + T[BOS, y_0] + sum_t T[y_{t-1}, y_t] + T[y_{n-1}, EOS].
double sequence_score(const Matrix& emissions, const Matrix& transitions, const std::vector<std::size_t>& tags);

/// log of the sum of exp(score) over all L^n label sequences (forward algorithm).
double log_partition(const Matrix& emissions, const Matrix& transitions);

/// Highest-scoring sequence; ties go to the lowest label index.
std::vector<std::size_t> viterbi_decode(const Matrix& emissions, const Matrix& transitions);

/// Negative log-likelihood log Z - score(gold) as a graph node.
ad::Var nll(ad::Var emissions, ad::Var transitions, const std::vector<std::size_t>& gold);

/// log Z as a graph node.
ad::Var log_partition(ad::Var emissions, ad::Var transitions);

}  // namespace xner::crf

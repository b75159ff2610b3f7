#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "xner/corpus.hpp"
#include "xner/embeddings.hpp"

namespace xner {

/// Seeded generative recipe for a bilingual transfer benchmark.
///
/// Each of `vocab` concepts has a source and a target surface form built from
/// disjoint alphabets. Entity concepts (PER / LOC / ORG) are capitalized and
/// carry a type-specific suffix in each language, and their vectors lean
/// toward a per-type centroid. Target vectors are the source vectors under a
/// random rotation R, plus Gaussian noise, stored in a random row order pi.
/// Raw vectors carry a per-concept length; alignment uses the normalized view.
struct SynthConfig {
  std::size_t vocab = 1000;
  std::size_t dim = 50;
  double noise = 0.01;
  double entity_fraction = 0.3;
  std::size_t train_sentences = 500;
  std::size_t test_sentences = 300;
  std::size_t seed_pairs = 100;
  /// Share of test entity tokens that are target-only names absent from the
  /// embedding files.
  double oov_rate = 0.15;
  /// Share of entity concepts never used in the source training corpus.
  double unseen_entity_rate = 0.3;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthBenchmark {
  EmbeddingSet source;  // raw vectors, source rank order
  EmbeddingSet target;  // raw vectors, permuted order
  Matrix rotation;      // R with target ~ R x
  /// truth[i] = target index of source word i.
  std::vector<std::size_t> truth;
  /// First `seed_pairs` ground-truth pairs (source rank order) as words.
  std::vector<std::pair<std::string, std::string>> seed_dictionary;
  LabeledCorpus source_train;  // source language, BIO
  LabeledCorpus target_test;   // target language, BIO
  /// Unlabeled target text (for capitalization statistics).
  std::vector<std::vector<std::string>> target_text;
};

SynthBenchmark make_synth_benchmark(const SynthConfig& cfg);

/// Rotation + permutation + noise embedding pair without corpora; used by the
/// alignment benchmarks. Both sets are row-normalized.
struct SynthEmbeddingPair {
  EmbeddingSet source;
  EmbeddingSet target;
  Matrix rotation;
  std::vector<std::size_t> truth;
};

SynthEmbeddingPair make_rotated_pair(std::size_t vocab, std::size_t dim, double noise, std::uint64_t seed);

/// Uniformly random orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
Matrix random_orthogonal(std::size_t dim, std::uint64_t seed);

}  // namespace xner

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xner/autodiff.hpp"
#include "xner/corpus.hpp"
#include "xner/embeddings.hpp"

namespace xner {

/// Architecture hyperparameters. Defaults: 25-dim
/// character embeddings, 50 character-LSTM units and 200 word-LSTM units per
/// direction, dropout 0.5.
struct TaggerConfig {
  enum class QueryParams { separate, shared };
  enum class HiddenSize { per_direction, total };

  std::size_t char_emb_dim = 25;
  std::size_t char_hidden = 50;
  std::size_t word_hidden = 200;
  std::size_t word_emb_dim = 100;
  std::vector<std::string> tagset;
  double dropout_input = 0.5;
  double dropout_word_out = 0.5;
  double dropout_attn = 0.5;
  bool use_self_attention = true;
  QueryParams query_params = QueryParams::separate;
  HiddenSize hidden_size = HiddenSize::per_direction;
  /// Lowercase character inputs (the "replace" ablation needs this).
  bool lowercase_chars = false;

  std::size_t word_hidden_per_direction() const;
  /// Width d of the word BiLSTM output H.
  std::size_t hidden_dim() const { return 2 * word_hidden_per_direction(); }
  /// Emission input width: 2d with self-attention, d without.
  std::size_t feature_dim() const { return use_self_attention ? 2 * hidden_dim() : hidden_dim(); }
  std::size_t labels() const { return tagset.size(); }
  /// Throws ConfigError on a non-positive dimension, an empty tagset or a
  /// dropout outside [0, 1).
  void validate() const;
};

/// Character inventory; id 0 is the learned unknown-character row.
class CharVocabulary {
 public:
  CharVocabulary() = default;
  explicit CharVocabulary(std::vector<char32_t> chars);

  std::size_t id(char32_t c) const;
  std::size_t size() const { return chars_.size() + 1; }
  const std::vector<char32_t>& chars() const { return chars_; }

 private:
  std::vector<char32_t> chars_;
  std::map<char32_t, std::size_t> index_;
};

/// Code points fed to the character encoder: ASCII digits become '0',
/// optionally lowercased.
std::u32string char_input(std::string_view word, bool lowercase);

/// Sorted set of characters seen in the corpus after char_input().
CharVocabulary build_char_vocabulary(const LabeledCorpus& corpus, bool lowercase);

struct LstmParams {
  ad::Parameter wx;  // in x 4h, gate blocks [input | forget | output | candidate]
  ad::Parameter wh;  // h x 4h
  ad::Parameter b;   // 1 x 4h
  std::size_t hidden = 0;
};

/// All parameters of the char-BiLSTM / word-BiLSTM / self-attention / CRF
/// stack plus what is needed to re-run it (character inventory and the fixed
/// unknown-word vector). Word embeddings are not part of the model.
struct TaggerModel {
  TaggerConfig config;
  CharVocabulary chars;
  ad::Parameter char_table;
  LstmParams char_fwd, char_bwd;
  LstmParams word_fwd, word_bwd;
  ad::Parameter attn_wq, attn_bq;  // unused when queries share the key MLP
  ad::Parameter attn_w, attn_b;
  ad::Parameter emit_w, emit_b;
  ad::Parameter transitions;  // (L+2) x (L+2), see crf.hpp
  RowVector unknown_word;
  /// Free-form provenance lines (seed, config hash) kept across save/load.
  std::vector<std::string> provenance;

  /// Randomly initialized model. Uniform +-sqrt(6/(fan_in+fan_out)) weights,
  /// LSTM forget-gate bias 1, other biases 0.
  static TaggerModel create(TaggerConfig config, CharVocabulary chars, std::uint64_t seed);

  /// Trainable parameters in a fixed order.
  std::vector<ad::Parameter*> parameters();
  std::vector<const ad::Parameter*> parameters() const;
  void zero_grad();
};

/// A sentence resolved against a model and word table.
struct EncodedSentence {
  std::vector<std::vector<std::size_t>> chars;  // per token, never empty
  Matrix word_vectors;                           // n x word_emb_dim, read-only inputs
  std::vector<std::size_t> tags;                 // empty when unlabeled

  std::size_t size() const { return chars.size(); }
};

using SentenceBatch = std::vector<EncodedSentence>;

/// Throws DataError for an empty token or a tag outside the tagset.
EncodedSentence encode_sentence(const Sentence& s, const TaggerModel& model, const WordTable& words,
                                bool with_tags = true);

/// Where dropout masks come from; a null rng means evaluation mode.
struct ForwardContext {
  std::mt19937_64* rng = nullptr;
  bool training() const { return rng != nullptr; }
};

/// Model parameters bound into one graph (as parameters when training, as
/// constants otherwise).
class BoundModel {
 public:
  BoundModel(ad::Graph& g, TaggerModel& model);
  BoundModel(ad::Graph& g, const TaggerModel& model);

  struct Lstm {
    ad::Var wx, wh, b;
    std::size_t hidden;
  };

  ad::Graph& graph;
  const TaggerConfig& config;
  ad::Var char_table;
  Lstm char_fwd, char_bwd, word_fwd, word_bwd;
  ad::Var attn_wq, attn_bq, attn_w, attn_b;
  ad::Var emit_w, emit_b;
  ad::Var transitions;
};

/// Runs an LSTM over the rows of `inputs` (n x in); returns the n hidden
/// states in input order. `reverse` reads right to left.
std::vector<ad::Var> lstm_sequence(const BoundModel::Lstm& p, ad::Var inputs, bool reverse);

/// [forward final state | backward final state] over character embeddings.
ad::Var encode_chars(const BoundModel& m, const std::vector<std::size_t>& char_ids);

struct AttentionOutput {
  ad::Var weights;  // softmax(Q K^T) masked by (E - I); rows are not renormalized
  ad::Var context;  // H^a = weights H
};

/// K = tanh(H W + b), Q = tanh(H W_q + b_q), H^a = (softmax(Q K^T) . (E - I)) H.
AttentionOutput self_attention(ad::Var h, ad::Var wq, ad::Var bq, ad::Var wk, ad::Var bk);

/// Word representations, BiLSTM, optional attention, and the emission layer.
struct SentenceFeatures {
  ad::Var hidden;    // H, n x d
  ad::Var features;  // [H | H^a] or H
  ad::Var emissions; // n x L
};

SentenceFeatures forward_features(const BoundModel& m, const EncodedSentence& s, const ForwardContext& ctx);

/// CRF negative log-likelihood of the gold tags.
ad::Var sentence_nll(const BoundModel& m, const EncodedSentence& s, const ForwardContext& ctx);

/// Viterbi decoding in evaluation mode; returns label indices.
std::vector<std::size_t> decode(const TaggerModel& model, const EncodedSentence& s);

/// Tags every sentence (evaluation mode), keeping tokens.
LabeledCorpus tag_corpus(const TaggerModel& model, const LabeledCorpus& corpus, const WordTable& words);

}  // namespace xner

#include "xner/tagger.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "xner/crf.hpp"
#include "xner/error.hpp"
#include "xner/parallel.hpp"
#include "xner/text.hpp"

namespace xner {

std::size_t TaggerConfig::word_hidden_per_direction() const {
  return hidden_size == HiddenSize::per_direction ? word_hidden : std::max<std::size_t>(1, word_hidden / 2);
}

void TaggerConfig::validate() const {
  if (char_emb_dim == 0 || char_hidden == 0 || word_hidden == 0 || word_emb_dim == 0) {
    throw ConfigError("tagger dimensions must be positive");
  }
  if (tagset.empty()) throw ConfigError("tagger needs a nonempty tagset");
  if (hidden_size == HiddenSize::total && (word_hidden < 2 || word_hidden % 2 != 0)) {
    throw ConfigError("a total word hidden size must be even and at least 2");
  }
  for (double p : {dropout_input, dropout_word_out, dropout_attn}) {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probabilities must lie in [0, 1)");
  }
}

CharVocabulary::CharVocabulary(std::vector<char32_t> chars) : chars_(std::move(chars)) {
  for (std::size_t i = 0; i < chars_.size(); ++i) index_.emplace(chars_[i], i + 1);
}

std::size_t CharVocabulary::id(char32_t c) const {
  auto it = index_.find(c);
  return it == index_.end() ? 0 : it->second;
}

std::u32string char_input(std::string_view word, bool lowercase) {
  std::u32string cps = text::decode_utf8(word);
  for (auto& c : cps) {
    if (c >= U'0' && c <= U'9') c = U'0';
    else if (lowercase) c = text::to_lower(c);
  }
  return cps;
}

CharVocabulary build_char_vocabulary(const LabeledCorpus& corpus, bool lowercase) {
  std::set<char32_t> seen;
  for (const auto& s : corpus.sentences) {
    for (const auto& tok : s.tokens) {
      for (char32_t c : char_input(tok, lowercase)) seen.insert(c);
    }
  }
  return CharVocabulary(std::vector<char32_t>(seen.begin(), seen.end()));
}

namespace {

ad::Tensor uniform(Eigen::Index rows, Eigen::Index cols, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  ad::Tensor t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
  return t;
}

ad::Tensor glorot(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  return uniform(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out),
                 std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), rng);
}

LstmParams make_lstm(const std::string& name, std::size_t in, std::size_t hidden, std::mt19937_64& rng) {
  LstmParams p;
  p.hidden = hidden;
  const auto h = static_cast<Eigen::Index>(hidden);
  p.wx = ad::Parameter(name + ".wx", glorot(in, 4 * hidden, rng));
  p.wh = ad::Parameter(name + ".wh", glorot(hidden, 4 * hidden, rng));
  ad::Tensor b = ad::Tensor::Zero(1, 4 * h);
  b.block(0, h, 1, h).setOnes();
  p.b = ad::Parameter(name + ".b", std::move(b));
  return p;
}

}  // namespace

TaggerModel TaggerModel::create(TaggerConfig config, CharVocabulary chars, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  TaggerModel m;
  m.config = std::move(config);
  m.chars = std::move(chars);
  const TaggerConfig& c = m.config;
  m.char_table = ad::Parameter(
      "char_table", uniform(static_cast<Eigen::Index>(m.chars.size()), static_cast<Eigen::Index>(c.char_emb_dim),
                            std::sqrt(3.0 / static_cast<double>(c.char_emb_dim)), rng));
  m.char_fwd = make_lstm("char_fwd", c.char_emb_dim, c.char_hidden, rng);
  m.char_bwd = make_lstm("char_bwd", c.char_emb_dim, c.char_hidden, rng);
  const std::size_t word_in = 2 * c.char_hidden + c.word_emb_dim;
  m.word_fwd = make_lstm("word_fwd", word_in, c.word_hidden_per_direction(), rng);
  m.word_bwd = make_lstm("word_bwd", word_in, c.word_hidden_per_direction(), rng);
  const std::size_t d = c.hidden_dim();
  if (c.use_self_attention) {
    if (c.query_params == TaggerConfig::QueryParams::separate) {
      m.attn_wq = ad::Parameter("attn_wq", glorot(d, d, rng));
      m.attn_bq = ad::Parameter("attn_bq", ad::Tensor::Zero(1, static_cast<Eigen::Index>(d)));
    }
    m.attn_w = ad::Parameter("attn_w", glorot(d, d, rng));
    m.attn_b = ad::Parameter("attn_b", ad::Tensor::Zero(1, static_cast<Eigen::Index>(d)));
  }
  const std::size_t labels = c.labels();
  m.emit_w = ad::Parameter("emit_w", glorot(c.feature_dim(), labels, rng));
  m.emit_b = ad::Parameter("emit_b", ad::Tensor::Zero(1, static_cast<Eigen::Index>(labels)));
  m.transitions = ad::Parameter("transitions", glorot(labels + 2, labels + 2, rng));
  m.unknown_word = oov_vector(c.word_emb_dim, rng);
  return m;
}

std::vector<ad::Parameter*> TaggerModel::parameters() {
  std::vector<ad::Parameter*> out{&char_table};
  for (LstmParams* l : {&char_fwd, &char_bwd, &word_fwd, &word_bwd}) {
    out.push_back(&l->wx);
    out.push_back(&l->wh);
    out.push_back(&l->b);
  }
  for (ad::Parameter* p : {&attn_wq, &attn_bq, &attn_w, &attn_b}) {
    if (p->size()) out.push_back(p);
  }
  out.push_back(&emit_w);
  out.push_back(&emit_b);
  out.push_back(&transitions);
  return out;
}

std::vector<const ad::Parameter*> TaggerModel::parameters() const {
  auto mut = const_cast<TaggerModel*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

void TaggerModel::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

EncodedSentence encode_sentence(const Sentence& s, const TaggerModel& model, const WordTable& words,
                                bool with_tags) {
  if (words.dim() != model.config.word_emb_dim) {
    throw ConfigError("word embeddings are " + std::to_string(words.dim()) + "-dimensional, model expects " +
                      std::to_string(model.config.word_emb_dim));
  }
  EncodedSentence e;
  const auto n = static_cast<Eigen::Index>(s.size());
  e.word_vectors.resize(n, static_cast<Eigen::Index>(model.config.word_emb_dim));
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::string& tok = s.tokens[i];
    std::u32string cps = char_input(tok, model.config.lowercase_chars);
    if (cps.empty()) throw DataError("empty token at position " + std::to_string(i + 1));
    std::vector<std::size_t> ids;
    ids.reserve(cps.size());
    for (char32_t c : cps) ids.push_back(model.chars.id(c));
    e.chars.push_back(std::move(ids));
    if (auto idx = words.find(tok)) {
      e.word_vectors.row(static_cast<Eigen::Index>(i)) = words.set().matrix.row(static_cast<Eigen::Index>(*idx));
    } else {
      e.word_vectors.row(static_cast<Eigen::Index>(i)) = model.unknown_word;
    }
  }
  if (with_tags) {
    const auto& ts = model.config.tagset;
    for (const auto& t : s.tags) {
      auto it = std::find(ts.begin(), ts.end(), t);
      if (it == ts.end()) throw DataError("tag '" + t + "' is not in the model tagset");
      e.tags.push_back(static_cast<std::size_t>(it - ts.begin()));
    }
  }
  return e;
}

namespace {

BoundModel::Lstm bind_lstm(ad::Graph& g, LstmParams& p) { return {g.param(p.wx), g.param(p.wh), g.param(p.b), p.hidden}; }

BoundModel::Lstm const_lstm(ad::Graph& g, const LstmParams& p) {
  return {g.constant(p.wx.value), g.constant(p.wh.value), g.constant(p.b.value), p.hidden};
}

}  // namespace

BoundModel::BoundModel(ad::Graph& g, TaggerModel& m) : graph(g), config(m.config) {
  char_table = g.param(m.char_table);
  char_fwd = bind_lstm(g, m.char_fwd);
  char_bwd = bind_lstm(g, m.char_bwd);
  word_fwd = bind_lstm(g, m.word_fwd);
  word_bwd = bind_lstm(g, m.word_bwd);
  if (m.config.use_self_attention) {
    attn_w = g.param(m.attn_w);
    attn_b = g.param(m.attn_b);
    if (m.config.query_params == TaggerConfig::QueryParams::separate) {
      attn_wq = g.param(m.attn_wq);
      attn_bq = g.param(m.attn_bq);
    } else {
      attn_wq = attn_w;
      attn_bq = attn_b;
    }
  }
  emit_w = g.param(m.emit_w);
  emit_b = g.param(m.emit_b);
  transitions = g.param(m.transitions);
}

BoundModel::BoundModel(ad::Graph& g, const TaggerModel& m) : graph(g), config(m.config) {
  char_table = g.constant(m.char_table.value);
  char_fwd = const_lstm(g, m.char_fwd);
  char_bwd = const_lstm(g, m.char_bwd);
  word_fwd = const_lstm(g, m.word_fwd);
  word_bwd = const_lstm(g, m.word_bwd);
  if (m.config.use_self_attention) {
    attn_w = g.constant(m.attn_w.value);
    attn_b = g.constant(m.attn_b.value);
    if (m.config.query_params == TaggerConfig::QueryParams::separate) {
      attn_wq = g.constant(m.attn_wq.value);
      attn_bq = g.constant(m.attn_bq.value);
    } else {
      attn_wq = attn_w;
      attn_bq = attn_b;
    }
  }
  emit_w = g.constant(m.emit_w.value);
  emit_b = g.constant(m.emit_b.value);
  transitions = g.constant(m.transitions.value);
}

std::vector<ad::Var> lstm_sequence(const BoundModel::Lstm& p, ad::Var inputs, bool reverse) {
  ad::Graph& g = *inputs.graph;
  const Eigen::Index n = inputs.rows();
  const auto h = static_cast<Eigen::Index>(p.hidden);
  ad::Var projected = ad::add(ad::matmul(inputs, p.wx), p.b);
  ad::Var hs = g.constant(ad::Tensor::Zero(1, h));
  ad::Var cs = g.constant(ad::Tensor::Zero(1, h));
  std::vector<ad::Var> out(static_cast<std::size_t>(n));
  for (Eigen::Index step = 0; step < n; ++step) {
    const Eigen::Index t = reverse ? n - 1 - step : step;
    ad::Var gates = ad::add(ad::row(projected, t), ad::matmul(hs, p.wh));
    ad::Var in = ad::sigmoid(ad::slice(gates, 0, 1, 0, h));
    ad::Var forget = ad::sigmoid(ad::slice(gates, 0, 1, h, h));
    ad::Var outg = ad::sigmoid(ad::slice(gates, 0, 1, 2 * h, h));
    ad::Var cand = ad::tanh(ad::slice(gates, 0, 1, 3 * h, h));
    cs = ad::add(ad::mul(forget, cs), ad::mul(in, cand));
    hs = ad::mul(outg, ad::tanh(cs));
    out[static_cast<std::size_t>(t)] = hs;
  }
  return out;
}

ad::Var encode_chars(const BoundModel& m, const std::vector<std::size_t>& char_ids) {
  if (char_ids.empty()) throw DataError("cannot encode an empty word");
  std::vector<ad::Var> rows;
  rows.reserve(char_ids.size());
  for (std::size_t id : char_ids) {
    if (id >= static_cast<std::size_t>(m.char_table.rows())) throw DataError("character id out of range");
    rows.push_back(ad::row(m.char_table, static_cast<Eigen::Index>(id)));
  }
  ad::Var seq = ad::concat(rows, 0);
  auto fwd = lstm_sequence(m.char_fwd, seq, false);
  auto bwd = lstm_sequence(m.char_bwd, seq, true);
  return ad::concat({fwd.back(), bwd.front()}, 1);
}

AttentionOutput self_attention(ad::Var h, ad::Var wq, ad::Var bq, ad::Var wk, ad::Var bk) {
  ad::Graph& g = *h.graph;
  const Eigen::Index n = h.rows();
  ad::Var keys = ad::tanh(ad::add(ad::matmul(h, wk), bk));
  ad::Var queries = ad::tanh(ad::add(ad::matmul(h, wq), bq));
  ad::Var scores = ad::matmul(queries, ad::transpose(keys));
  ad::Tensor mask = ad::Tensor::Ones(n, n);
  mask.diagonal().setZero();
  ad::Var weights = ad::mul(ad::softmax(scores), g.constant(std::move(mask)));
  return {weights, ad::matmul_order_invariant(weights, h)};
}

SentenceFeatures forward_features(const BoundModel& m, const EncodedSentence& s, const ForwardContext& ctx) {
  ad::Graph& g = m.graph;
  const TaggerConfig& c = m.config;
  const auto n = static_cast<Eigen::Index>(s.size());
  if (n == 0) throw DataError("cannot tag an empty sentence");
  if (s.word_vectors.rows() != n) throw DataError("sentence encoding is inconsistent");
  std::vector<ad::Var> reprs;
  reprs.reserve(s.size());
  ad::Var words = g.constant(s.word_vectors);
  for (Eigen::Index i = 0; i < n; ++i) {
    ad::Var chars = encode_chars(m, s.chars[static_cast<std::size_t>(i)]);
    reprs.push_back(ad::concat({chars, ad::row(words, i)}, 1));
  }
  ad::Var x = ad::concat(reprs, 0);
  if (ctx.training()) x = ad::dropout(x, ad::dropout_mask(x.rows(), x.cols(), c.dropout_input, *ctx.rng));

  auto fwd = lstm_sequence(m.word_fwd, x, false);
  auto bwd = lstm_sequence(m.word_bwd, x, true);
  std::vector<ad::Var> rows;
  rows.reserve(s.size());
  for (std::size_t t = 0; t < s.size(); ++t) rows.push_back(ad::concat({fwd[t], bwd[t]}, 1));
  ad::Var h = ad::concat(rows, 0);
  if (ctx.training()) h = ad::dropout(h, ad::dropout_mask(h.rows(), h.cols(), c.dropout_word_out, *ctx.rng));

  SentenceFeatures out;
  out.hidden = h;
  out.features = h;
  if (c.use_self_attention) {
    ad::Var context = self_attention(h, m.attn_wq, m.attn_bq, m.attn_w, m.attn_b).context;
    if (ctx.training()) {
      context = ad::dropout(context, ad::dropout_mask(context.rows(), context.cols(), c.dropout_attn, *ctx.rng));
    }
    out.features = ad::concat({h, context}, 1);
  }
  out.emissions = ad::add(ad::matmul(out.features, m.emit_w), m.emit_b);
  return out;
}

ad::Var sentence_nll(const BoundModel& m, const EncodedSentence& s, const ForwardContext& ctx) {
  if (s.tags.size() != s.size()) throw DataError("sentence has no gold tags");
  SentenceFeatures f = forward_features(m, s, ctx);
  return crf::nll(f.emissions, m.transitions, s.tags);
}

std::vector<std::size_t> decode(const TaggerModel& model, const EncodedSentence& s) {
  ad::Graph g;
  BoundModel m(g, model);
  SentenceFeatures f = forward_features(m, s, ForwardContext{});
  return crf::viterbi_decode(f.emissions.value(), model.transitions.value);
}

LabeledCorpus tag_corpus(const TaggerModel& model, const LabeledCorpus& corpus, const WordTable& words) {
  LabeledCorpus out = corpus;
  parallel_for(corpus.size(), 16, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      EncodedSentence e = encode_sentence(corpus.sentences[i], model, words, false);
      auto path = decode(model, e);
      auto& tags = out.sentences[i].tags;
      tags.resize(path.size());
      for (std::size_t t = 0; t < path.size(); ++t) tags[t] = model.config.tagset[path[t]];
    }
  });
  return out;
}

}  // namespace xner

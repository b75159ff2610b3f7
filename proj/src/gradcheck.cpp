#include "xner/gradcheck.hpp"

#include <random>

#include "xner/crf.hpp"
#include "xner/tagger.hpp"

namespace xner {

namespace {

ad::Tensor random_tensor(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  ad::Tensor t(r, c);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
  return t;
}

// Contracts an arbitrary-shape output with fixed random weights so that every
// output coordinate contributes a distinct gradient.
ad::Var contract(ad::Var out, std::uint64_t salt) {
  std::mt19937_64 rng(salt);
  ad::Var w = out.graph->constant(random_tensor(out.rows(), out.cols(), rng));
  return ad::sum(ad::mul(out, w));
}

}  // namespace

std::vector<GradcheckCase> primitive_gradchecks(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ad::Parameter a("a", random_tensor(3, 4, rng));
  ad::Parameter b("b", random_tensor(4, 2, rng));
  ad::Parameter c("c", random_tensor(3, 4, rng));
  ad::Parameter r("r", random_tensor(1, 4, rng));
  ad::Parameter t("t", random_tensor(5, 5, rng));
  ad::Tensor mask = ad::dropout_mask(3, 4, 0.5, rng);

  using Fn = std::function<ad::Var(ad::Graph&)>;
  struct Check {
    const char* name;
    Fn fn;
    std::vector<ad::Parameter*> params;
  };
  const std::uint64_t s = seed + 101;
  std::vector<Check> checks = {
      {"matmul", [&](ad::Graph& g) { return contract(ad::matmul(g.param(a), g.param(b)), s); }, {&a, &b}},
      {"matmul_order_invariant",
       [&](ad::Graph& g) { return contract(ad::matmul_order_invariant(g.param(a), g.param(b)), s); },
       {&a, &b}},
      {"add", [&](ad::Graph& g) { return contract(ad::add(g.param(a), g.param(c)), s); }, {&a, &c}},
      {"add_broadcast", [&](ad::Graph& g) { return contract(ad::add(g.param(a), g.param(r)), s); }, {&a, &r}},
      {"mul", [&](ad::Graph& g) { return contract(ad::mul(g.param(a), g.param(c)), s); }, {&a, &c}},
      {"scale", [&](ad::Graph& g) { return contract(ad::scale(g.param(a), -1.7), s); }, {&a}},
      {"tanh", [&](ad::Graph& g) { return contract(ad::tanh(g.param(a)), s); }, {&a}},
      {"sigmoid", [&](ad::Graph& g) { return contract(ad::sigmoid(g.param(a)), s); }, {&a}},
      {"softmax", [&](ad::Graph& g) { return contract(ad::softmax(g.param(a)), s); }, {&a}},
      {"log_sum_exp", [&](ad::Graph& g) { return contract(ad::log_sum_exp(g.param(a)), s); }, {&a}},
      {"concat_cols", [&](ad::Graph& g) { return contract(ad::concat({g.param(a), g.param(c)}, 1), s); }, {&a, &c}},
      {"concat_rows", [&](ad::Graph& g) { return contract(ad::concat({g.param(a), g.param(r)}, 0), s); }, {&a, &r}},
      {"slice", [&](ad::Graph& g) { return contract(ad::slice(g.param(a), 1, 2, 1, 3), s); }, {&a}},
      {"row", [&](ad::Graph& g) { return contract(ad::row(g.param(a), 2), s); }, {&a}},
      {"transpose", [&](ad::Graph& g) { return contract(ad::transpose(g.param(a)), s); }, {&a}},
      {"sum", [&](ad::Graph& g) { return ad::scale(ad::sum(ad::tanh(g.param(a))), 1.3); }, {&a}},
      {"mean", [&](ad::Graph& g) { return ad::mean(ad::mul(g.param(a), g.param(c))); }, {&a, &c}},
      {"dropout", [&](ad::Graph& g) { return contract(ad::dropout(g.param(a), mask), s); }, {&a}},
      {"crf_nll",
       [&](ad::Graph& g) {
         return crf::nll(ad::slice(g.param(a), 0, 3, 0, 3), g.param(t), std::vector<std::size_t>{2, 0, 1});
       },
       {&a, &t}},
  };
  std::vector<GradcheckCase> out;
  for (auto& sp : checks) {
    out.push_back({sp.name, ad::gradient_check(sp.fn, sp.params), 1e-6});
  }
  return out;
}

GradcheckCase tagger_gradcheck(std::uint64_t seed, bool self_attention) {
  TaggerConfig cfg;
  cfg.char_emb_dim = 3;
  cfg.char_hidden = 2;
  cfg.word_hidden = 3;
  cfg.word_emb_dim = 4;
  cfg.tagset = {"O", "B-X", "I-X"};
  cfg.dropout_input = cfg.dropout_word_out = cfg.dropout_attn = 0.0;
  cfg.use_self_attention = self_attention;
  Sentence sent{{"Ab", "cd", "Ef"}, {"B-X", "I-X", "O"}};
  LabeledCorpus corpus;
  corpus.sentences.push_back(sent);
  TaggerModel model = TaggerModel::create(cfg, build_char_vocabulary(corpus, false), seed);

  // Glorot-scale weights leave some attention gradients near 1e-9, where the
  // central difference is all roundoff. Unit-scale weights keep every
  // coordinate well above that floor.
  std::mt19937_64 rng(seed + 7);
  for (ad::Parameter* p : model.parameters()) p->value = random_tensor(p->value.rows(), p->value.cols(), rng);
  EmbeddingSet emb;
  emb.vocab = Vocabulary({"ab", "cd"});
  emb.matrix = random_tensor(2, 4, rng);
  WordTable words(std::move(emb));
  const EncodedSentence enc = encode_sentence(sent, model, words);

  auto loss = [&](ad::Graph& g) {
    BoundModel m(g, model);
    return sentence_nll(m, enc, ForwardContext{});
  };
  return {self_attention ? "tagger_nll" : "tagger_nll_no_attention",
          ad::gradient_check(loss, model.parameters()), 1e-4};
}

}  // namespace xner

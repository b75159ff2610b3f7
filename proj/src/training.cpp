#include "xner/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <ostream>

#include "xner/error.hpp"
#include "xner/evaluation.hpp"

namespace xner {

void TrainConfig::validate() const {
  if (epochs == 0 || batch_size == 0 || eval_every_batches == 0) {
    throw ConfigError("epochs, batch size and evaluation interval must be positive");
  }
  if (!(lr0 > 0.0) || decay_rho < 0.0 || momentum < 0.0 || momentum >= 1.0 || clip_norm < 0.0) {
    throw ConfigError("invalid optimizer settings");
  }
}

double lr_schedule(std::size_t completed_epochs, const TrainConfig& cfg) {
  return cfg.lr0 / (1.0 + cfg.decay_rho * static_cast<double>(completed_epochs));
}

void sgd_momentum_step(const std::vector<ad::Parameter*>& params, std::vector<ad::Tensor>& velocity, double lr,
                       double momentum) {
  if (velocity.size() != params.size()) {
    velocity.clear();
    for (const auto* p : params) velocity.push_back(ad::Tensor::Zero(p->value.rows(), p->value.cols()));
  }
  for (const auto* p : params) {
    if (p->grad.size() && !p->grad.allFinite()) throw NumericalError("non-finite gradient in " + p->name);
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    ad::Parameter& p = *params[k];
    if (!p.requires_grad) continue;
    velocity[k] *= momentum;
    if (p.grad.size()) velocity[k] -= lr * p.grad;
    p.value += velocity[k];
  }
}

double clip_gradients(const std::vector<ad::Parameter*>& params, double max_norm) {
  const double norm = ad::grad_norm(params);
  if (!std::isfinite(norm)) throw NumericalError("non-finite gradient norm");
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto* p : params) p->grad *= s;
  }
  return norm;
}

double batch_loss_and_gradients(TaggerModel& model, const SentenceBatch& batch, std::mt19937_64* rng) {
  model.zero_grad();
  ad::Graph g;
  BoundModel bound(g, model);
  ForwardContext ctx{rng};
  std::vector<ad::Var> losses;
  losses.reserve(batch.size());
  for (const auto& s : batch) losses.push_back(sentence_nll(bound, s, ctx));
  ad::Var total = losses.size() == 1 ? losses.front() : ad::sum(ad::concat(losses, 0));
  g.backward(total);
  return total.scalar();
}

std::pair<LabeledCorpus, LabeledCorpus> holdout_split(const LabeledCorpus& corpus, double fraction) {
  if (corpus.size() < 2) throw DataError("need at least two sentences to hold out a development slice");
  std::size_t dev = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(corpus.size()))));
  dev = std::min(dev, corpus.size() - 1);
  LabeledCorpus a, b;
  a.sentences.assign(corpus.sentences.begin(), corpus.sentences.end() - static_cast<std::ptrdiff_t>(dev));
  b.sentences.assign(corpus.sentences.end() - static_cast<std::ptrdiff_t>(dev), corpus.sentences.end());
  return {std::move(a), std::move(b)};
}

namespace {

// Copies parameter values and the tagging-relevant state only; gradients are
// not carried into snapshots.
void copy_values(const TaggerModel& from, TaggerModel& to) {
  auto src = from.parameters();
  auto dst = to.parameters();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k]->value = src[k]->value;
}

}  // namespace

TrainResult train(const LabeledCorpus& train_corpus, const LabeledCorpus& dev_corpus, const WordTable& train_words,
                  const WordTable& dev_words, TaggerConfig tagger, const TrainConfig& cfg, std::ostream* log) {
  cfg.validate();
  if (train_corpus.empty() || dev_corpus.empty()) throw DataError("training and development corpora must be nonempty");

  std::vector<std::string> train_tags = collect_tagset(train_corpus);
  for (const auto& t : collect_tagset(dev_corpus)) {
    if (std::find(train_tags.begin(), train_tags.end(), t) == train_tags.end()) {
      throw DataError("development tag '" + t + "' never occurs in the training corpus");
    }
  }
  if (tagger.tagset.empty()) tagger.tagset = train_tags;
  tagger.word_emb_dim = train_words.dim();
  if (dev_words.dim() != train_words.dim()) throw ConfigError("train and dev word embeddings differ in dimension");

  CharVocabulary chars = build_char_vocabulary(train_corpus, tagger.lowercase_chars);
  TrainResult result{TaggerModel::create(tagger, std::move(chars), cfg.seed), {}, -1.0, false, {}, {}};
  TaggerModel& model = result.model;
  TaggerModel best = model;

  SentenceBatch train_set, dev_set;
  for (const auto& s : train_corpus.sentences) train_set.push_back(encode_sentence(s, model, train_words));
  for (const auto& s : dev_corpus.sentences) dev_set.push_back(encode_sentence(s, model, dev_words));

  bool dev_has_entities = false;
  for (const auto& s : dev_corpus.sentences) {
    if (!extract_spans(s.tags).empty()) dev_has_entities = true;
  }
  if (!dev_has_entities) {
    (log ? *log : std::cerr) << "warning: development corpus has no entities; selecting by token accuracy\n";
    result.selected_by_token_accuracy = true;
  }

  std::mt19937_64 rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<ad::Tensor> velocity;
  const auto params = model.parameters();
  double best_score = -1.0;
  double loss_since_eval = 0.0;
  std::size_t sentences_since_eval = 0;

  auto evaluate = [&](std::size_t epoch, std::size_t batch, double lr) {
    LabeledCorpus predicted = dev_corpus;
    for (std::size_t i = 0; i < dev_set.size(); ++i) {
      auto path = decode(model, dev_set[i]);
      for (std::size_t t = 0; t < path.size(); ++t) predicted.sentences[i].tags[t] = model.config.tagset[path[t]];
    }
    EvalReport rep = span_f1(dev_corpus, predicted);
    EvalRecord rec{epoch, batch, sentences_since_eval ? loss_since_eval / static_cast<double>(sentences_since_eval) : 0.0,
                   rep.f1(), rep.token_accuracy(), lr};
    result.history.push_back(rec);
    loss_since_eval = 0.0;
    sentences_since_eval = 0;
    const double score = result.selected_by_token_accuracy ? rec.dev_token_accuracy : rec.dev_f1;
    if (score > best_score) {
      best_score = score;
      result.best_dev_f1 = rec.dev_f1;
      copy_values(model, best);
    }
    if (log) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "epoch=%zu batch=%zu loss=%.6f dev_f1=%.4f\n", epoch, batch, rec.loss, rec.dev_f1);
      *log << buf << std::flush;
    }
  };

  const std::size_t batches = (train_set.size() + cfg.batch_size - 1) / cfg.batch_size;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_schedule(epoch, cfg);
    result.epoch_lrs.push_back(lr);
    std::shuffle(order.begin(), order.end(), rng);
    bool evaluated_last = false;
    for (std::size_t b = 0; b < batches; ++b) {
      SentenceBatch batch;
      for (std::size_t k = b * cfg.batch_size; k < std::min(train_set.size(), (b + 1) * cfg.batch_size); ++k) {
        batch.push_back(train_set[order[k]]);
      }
      const double loss = batch_loss_and_gradients(model, batch, &rng);
      if (!std::isfinite(loss)) throw NumericalError("non-finite training loss");
      if (cfg.clip_norm > 0.0) clip_gradients(params, cfg.clip_norm);
      sgd_momentum_step(params, velocity, lr, cfg.momentum);
      result.batch_losses.push_back(loss);
      loss_since_eval += loss;
      sentences_since_eval += batch.size();
      evaluated_last = false;
      if ((b + 1) % cfg.eval_every_batches == 0) {
        evaluate(epoch + 1, b + 1, lr);
        evaluated_last = true;
      }
    }
    if (!evaluated_last) evaluate(epoch + 1, batches, lr);
  }

  model.zero_grad();
  copy_values(best, model);
  return result;
}

}  // namespace xner

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "xner/autodiff.hpp"
#include "xner/corpus.hpp"
#include "xner/tagger.hpp"
#include "xner/translation.hpp"

namespace xner {

/// Optimization recipe. Defaults: 30 epochs, batches of 10, dev evaluation
/// every 150 batches and at each epoch end, lr0 = 0.015 with hyperbolic decay
/// rho = 0.05, momentum 0.9, gradient clipping at global norm 5.
struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 10;
  std::size_t eval_every_batches = 150;
  double lr0 = 0.015;
  double decay_rho = 0.05;
  double momentum = 0.9;
  /// Global-norm clipping threshold; 0 disables.
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
  TranslationMode mode = TranslationMode::translate;
  /// Training data translated by an external dictionary rather than by this
  /// pipeline; lowers the default attention dropout.
  bool external_translation = false;

  double default_attention_dropout() const { return external_translation ? 0.2 : 0.5; }
  void validate() const;
};

/// lr0 / (1 + rho * t), t = completed epochs.
double lr_schedule(std::size_t completed_epochs, const TrainConfig& cfg);

/// v <- momentum * v - lr * g; theta <- theta + v. `velocity` is resized on
/// first use. Throws NumericalError on a non-finite gradient.
void sgd_momentum_step(const std::vector<ad::Parameter*>& params, std::vector<ad::Tensor>& velocity, double lr,
                       double momentum);

/// Scales all gradients so their global norm is at most `max_norm`; returns
/// the norm before scaling.
double clip_gradients(const std::vector<ad::Parameter*>& params, double max_norm);

/// Summed NLL of the batch with gradients accumulated into the (zeroed) model
/// parameters. A null rng disables dropout.
double batch_loss_and_gradients(TaggerModel& model, const SentenceBatch& batch, std::mt19937_64* rng);

struct EvalRecord {
  std::size_t epoch = 0;  // 1-based
  std::size_t batch = 0;  // 1-based, within the epoch
  double loss = 0.0;      // mean sentence NLL since the previous evaluation
  double dev_f1 = 0.0;
  double dev_token_accuracy = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  TaggerModel model;  // parameters at the best dev evaluation
  std::vector<EvalRecord> history;
  double best_dev_f1 = 0.0;
  /// Dev gold had no entities; selection used token accuracy instead.
  bool selected_by_token_accuracy = false;
  /// Summed loss of every batch, in order.
  std::vector<double> batch_losses;
  /// Learning rate used in each epoch.
  std::vector<double> epoch_lrs;
};

/// Seeded, deterministic training. Sentences are reshuffled every epoch; dev
/// evaluation never draws from the training random stream. Writes one
/// "epoch=<e> batch=<b> loss=<l> dev_f1=<f>" line per evaluation to `log`.
TrainResult train(const LabeledCorpus& train_corpus, const LabeledCorpus& dev_corpus, const WordTable& train_words,
                  const WordTable& dev_words, TaggerConfig tagger, const TrainConfig& cfg,
                  std::ostream* log = nullptr);

/// Splits off the last 10% (at least one sentence) as a development set.
std::pair<LabeledCorpus, LabeledCorpus> holdout_split(const LabeledCorpus& corpus, double fraction = 0.1);

}  // namespace xner

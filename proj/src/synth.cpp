#include "xner/synth.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "xner/error.hpp"
#include "xner/text.hpp"

namespace xner {

void SynthConfig::validate() const {
  if (vocab < 4 || dim < 2) throw ConfigError("synth needs vocab >= 4 and dim >= 2");
  if (noise < 0.0) throw ConfigError("noise must be nonnegative");
  if (!(entity_fraction > 0.0 && entity_fraction < 1.0)) throw ConfigError("entity fraction must lie in (0, 1)");
  if (seed_pairs == 0 || seed_pairs > vocab) throw ConfigError("seed pairs must lie in [1, vocab]");
  if (train_sentences < 2 || test_sentences < 1) throw ConfigError("synth needs at least 2 train and 1 test sentence");
  if (oov_rate < 0.0 || oov_rate >= 1.0 || unseen_entity_rate < 0.0 || unseen_entity_rate >= 1.0) {
    throw ConfigError("rates must lie in [0, 1)");
  }
}

Matrix random_orthogonal(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd g(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = n01(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    if (r(k, k) < 0) q.col(k) *= -1.0;
  }
  return q;
}

namespace {

enum class Kind { filler, per, loc, org };

const char* type_name(Kind k) {
  switch (k) {
    case Kind::per:
      return "PER";
    case Kind::loc:
      return "LOC";
    case Kind::org:
      return "ORG";
    case Kind::filler:
      break;
  }
  return "";
}

struct Alphabet {
  std::string consonants;
  std::string vowels;
  std::string suffix[4];
};

// Disjoint letter inventories, so surface forms never coincide across languages.
const Alphabet kSource{"bcdfghjklm", "aei", {"", "ika", "ham", "bec"}};
const Alphabet kTarget{"npqrstvwxz", "ouy", {"", "ovy", "uny", "sot"}};

std::string make_word(const Alphabet& a, Kind kind, std::mt19937_64& rng, std::set<std::string>& used) {
  std::uniform_int_distribution<std::size_t> pc(0, a.consonants.size() - 1), pv(0, a.vowels.size() - 1);
  std::uniform_int_distribution<int> syll(2, 3);
  for (;;) {
    std::string w;
    const int n = syll(rng);
    for (int k = 0; k < n; ++k) {
      w += a.consonants[pc(rng)];
      w += a.vowels[pv(rng)];
    }
    w += a.suffix[static_cast<int>(kind)];
    if (used.insert(w).second) return w;
  }
}

Eigen::RowVectorXd gaussian_row(std::size_t dim, std::mt19937_64& rng, double sd) {
  std::normal_distribution<double> n(0.0, sd);
  Eigen::RowVectorXd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = n(rng);
  return v;
}

}  // namespace

SynthEmbeddingPair make_rotated_pair(std::size_t vocab, std::size_t dim, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SynthEmbeddingPair p;
  p.rotation = random_orthogonal(dim, seed + 1);
  std::vector<std::size_t> perm(vocab);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  p.truth = perm;
  Matrix x(static_cast<Eigen::Index>(vocab), static_cast<Eigen::Index>(dim));
  Matrix y(static_cast<Eigen::Index>(vocab), static_cast<Eigen::Index>(dim));
  std::vector<std::string> sw(vocab), tw(vocab);
  for (std::size_t i = 0; i < vocab; ++i) {
    Eigen::RowVectorXd v = gaussian_row(dim, rng, 1.0).normalized();
    x.row(static_cast<Eigen::Index>(i)) = v;
    Eigen::RowVectorXd t = v * p.rotation.transpose() + gaussian_row(dim, rng, noise);
    y.row(static_cast<Eigen::Index>(perm[i])) = t.normalized();
    sw[i] = "s" + std::to_string(i);
    tw[perm[i]] = "t" + std::to_string(perm[i]);
  }
  p.source.vocab = Vocabulary(std::move(sw));
  p.source.matrix = std::move(x);
  p.source.normalized = true;
  p.target.vocab = Vocabulary(std::move(tw));
  p.target.matrix = std::move(y);
  p.target.normalized = true;
  return p;
}

SynthBenchmark make_synth_benchmark(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const std::size_t V = cfg.vocab, d = cfg.dim;
  SynthBenchmark b;
  b.rotation = random_orthogonal(d, cfg.seed * 7919 + 17);

  // Concept kinds: entities spread evenly over the three types, placed at
  // random ranks.
  std::vector<Kind> kind(V, Kind::filler);
  const auto n_ent = static_cast<std::size_t>(cfg.entity_fraction * static_cast<double>(V));
  std::vector<std::size_t> ranks(V);
  std::iota(ranks.begin(), ranks.end(), std::size_t{0});
  std::shuffle(ranks.begin(), ranks.end(), rng);
  for (std::size_t k = 0; k < n_ent; ++k) kind[ranks[k]] = static_cast<Kind>(1 + k % 3);

  std::vector<Eigen::RowVectorXd> centroid;
  for (int t = 0; t < 4; ++t) centroid.push_back(gaussian_row(d, rng, 1.0).normalized());

  std::set<std::string> used_src, used_tgt;
  std::vector<std::string> src_words(V), tgt_surface(V);
  Matrix x(static_cast<Eigen::Index>(V), static_cast<Eigen::Index>(d));
  Matrix y(static_cast<Eigen::Index>(V), static_cast<Eigen::Index>(d));
  std::vector<std::size_t> perm(V);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::uniform_real_distribution<double> length(0.5, 1.5);
  std::vector<std::string> tgt_words(V);
  for (std::size_t c = 0; c < V; ++c) {
    src_words[c] = make_word(kSource, kind[c], rng, used_src);
    tgt_surface[c] = make_word(kTarget, kind[c], rng, used_tgt);
    Eigen::RowVectorXd v = gaussian_row(d, rng, 1.0 / std::sqrt(static_cast<double>(d)));
    if (kind[c] != Kind::filler) v += 0.8 * centroid[static_cast<int>(kind[c])];
    v.normalize();
    const double len = length(rng);
    x.row(static_cast<Eigen::Index>(c)) = len * v;
    Eigen::RowVectorXd t = v * b.rotation.transpose() + gaussian_row(d, rng, cfg.noise);
    y.row(static_cast<Eigen::Index>(perm[c])) = len * t.normalized();
    tgt_words[perm[c]] = tgt_surface[c];
  }
  b.source.vocab = Vocabulary(src_words);
  b.source.matrix = std::move(x);
  b.target.vocab = Vocabulary(tgt_words);
  b.target.matrix = std::move(y);
  b.truth = perm;
  for (std::size_t c = 0; c < cfg.seed_pairs; ++c) b.seed_dictionary.emplace_back(src_words[c], tgt_surface[c]);

  // Entity pools per type: seen (usable in training) and unseen.
  std::vector<std::size_t> fillers;
  std::vector<std::vector<std::size_t>> seen(4), all(4);
  {
    std::vector<std::size_t> ents;
    for (std::size_t c = 0; c < V; ++c) {
      if (kind[c] == Kind::filler) fillers.push_back(c);
      else ents.push_back(c);
    }
    std::shuffle(ents.begin(), ents.end(), rng);
    const auto n_unseen = static_cast<std::size_t>(cfg.unseen_entity_rate * static_cast<double>(ents.size()));
    for (std::size_t k = 0; k < ents.size(); ++k) {
      const int t = static_cast<int>(kind[ents[k]]);
      all[t].push_back(ents[k]);
      if (k >= n_unseen) seen[t].push_back(ents[k]);
    }
    for (int t = 1; t < 4; ++t) {
      std::sort(seen[t].begin(), seen[t].end());
      std::sort(all[t].begin(), all[t].end());
      if (seen[t].empty()) seen[t] = all[t];
    }
  }

  // Target-only names for the test set (no embedding row).
  std::vector<std::vector<std::string>> oov_names(4);
  for (int t = 1; t < 4; ++t) {
    for (int k = 0; k < 30; ++k) oov_names[t].push_back(make_word(kTarget, static_cast<Kind>(t), rng, used_tgt));
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick_type(1, 3);
  auto choose = [&](const std::vector<std::size_t>& pool) {
    return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
  };

  // Sentence skeleton: a sequence of (concept or oov name, tag).
  auto sentence = [&](bool target_side, bool for_test) {
    Sentence s;
    std::uniform_int_distribution<int> len(6, 14);
    const int want = len(rng);
    while (static_cast<int>(s.size()) < want) {
      if (unit(rng) < 0.3) {
        const auto type = static_cast<Kind>(pick_type(rng));
        const int t = static_cast<int>(type);
        const int span = (type == Kind::loc) ? 1 : (unit(rng) < 0.5 ? 1 : 2);
        for (int k = 0; k < span; ++k) {
          std::string word;
          if (for_test && unit(rng) < cfg.oov_rate) {
            word = oov_names[t][std::uniform_int_distribution<std::size_t>(0, oov_names[t].size() - 1)(rng)];
          } else {
            const std::size_t c = choose(for_test ? all[t] : seen[t]);
            word = target_side ? tgt_surface[c] : src_words[c];
          }
          s.tokens.push_back(text::capitalize_first(word));
          s.tags.push_back(std::string(k == 0 ? "B-" : "I-") + type_name(type));
        }
      } else {
        const std::size_t c = choose(fillers);
        s.tokens.push_back(target_side ? tgt_surface[c] : src_words[c]);
        s.tags.push_back("O");
      }
    }
    return s;
  };

  for (std::size_t i = 0; i < cfg.train_sentences; ++i) b.source_train.sentences.push_back(sentence(false, false));
  for (std::size_t i = 0; i < cfg.test_sentences; ++i) b.target_test.sentences.push_back(sentence(true, true));
  for (std::size_t i = 0; i < cfg.test_sentences; ++i) b.target_text.push_back(sentence(true, false).tokens);
  return b;
}

}  // namespace xner

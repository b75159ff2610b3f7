#include "xner/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "xner/alignment.hpp"
#include "xner/checkpoint.hpp"
#include "xner/corpus.hpp"
#include "xner/embeddings.hpp"
#include "xner/error.hpp"
#include "xner/evaluation.hpp"
#include "xner/gradcheck.hpp"
#include "xner/parallel.hpp"
#include "xner/synth.hpp"
#include "xner/tagger.hpp"
#include "xner/text.hpp"
#include "xner/training.hpp"
#include "xner/translation.hpp"

namespace xner {

namespace {

namespace fs = std::filesystem;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

/// Flat key=value file. Keys may be written with or without leading dashes and
/// with '_' for '-'.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(t.substr(0, eq));
    while (!key.empty() && key[0] == '-') key.erase(0, 1);
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    kv.emplace_back(std::move(key), trim(t.substr(eq + 1)));
  }
  return kv;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Options that do not influence the content of any output: worker count, the
// config path (its values are hashed as flags) and output destinations.
bool excluded_from_hash(const std::string& name) {
  static const std::set<std::string> skip = {"help", "threads", "config", "out", "log", "out-dir", "table-out", "emb-out"};
  return skip.count(name) > 0;
}

struct Provenance {
  std::string command;
  std::uint64_t seed = 0;
  std::string hash;

  std::vector<std::string> lines() const {
    return {"xner " + command, "seed=" + std::to_string(seed), "config_hash=" + hash};
  }
};

Provenance make_provenance(const CLI::App& sub, std::uint64_t seed) {
  std::map<std::string, std::string> kv;
  for (const CLI::Option* o : sub.get_options()) {
    if (o->get_lnames().empty()) continue;
    const std::string& name = o->get_lnames().front();
    if (excluded_from_hash(name)) continue;
    std::string value;
    if (o->count() > 0) {
      for (const auto& r : o->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = o->get_default_str();
    }
    kv[name] = value;
  }
  std::string joined;
  for (const auto& [k, v] : kv) joined += k + "=" + v + "\n";
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(joined));
  return {sub.get_name(), seed, buf};
}

void write_comments(std::ostream& out, const std::vector<std::string>& lines) {
  for (const auto& l : lines) out << "# " << l << '\n';
}

/// CoNLL, embedding and plain-text outputs have no comment syntax that every
/// reader tolerates, so their provenance goes to "<path>.meta".
void write_meta(const std::string& path, const Provenance& p) {
  std::ofstream out(path + ".meta");
  if (!out) throw DataError("cannot write " + path + ".meta");
  write_comments(out, p.lines());
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

void copy_file_bytes(const std::string& from, const std::string& to) {
  std::ifstream in(from, std::ios::binary);
  if (!in) throw DataError("cannot open " + from);
  std::ofstream out = open_output(to);
  out << in.rdbuf();
}

std::vector<std::string> read_tokens(const std::string& path, const std::string& format) {
  std::vector<std::string> tokens;
  if (format == "conll") {
    for (const auto& s : read_conll(path).sentences) tokens.insert(tokens.end(), s.tokens.begin(), s.tokens.end());
    return tokens;
  }
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    for (auto& t : text::split_ws(line)) tokens.push_back(std::move(t));
  }
  return tokens;
}

LabeledCorpus read_input(const std::string& path, const std::string& format) {
  if (format == "conll") return read_conll(path);
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_plain_text(in, path);
}

SimilarityMetric parse_metric(const std::string& s) {
  if (s == "csls") return SimilarityMetric::csls;
  if (s == "cosine") return SimilarityMetric::cosine;
  throw ConfigError("unknown metric '" + s + "' (expected csls or cosine)");
}

// Source/target embeddings as the alignment sees them: normalized and
// projected into the shared space.
struct AlignedSpaces {
  EmbeddingSet src;
  EmbeddingSet tgt;
  AlignmentModel model;
};

AlignedSpaces load_aligned(const std::string& align, const std::string& src, const std::string& tgt,
                           std::size_t max_vocab) {
  AlignedSpaces a{normalize_rows(load_embeddings(src, max_vocab)), normalize_rows(load_embeddings(tgt, max_vocab)),
                  load_alignment(align)};
  if (a.src.dim() != a.model.dim() || a.tgt.dim() != a.model.dim()) {
    throw ConfigError("alignment model is " + std::to_string(a.model.dim()) + "-dimensional but embeddings are " +
                      std::to_string(a.src.dim()) + " and " + std::to_string(a.tgt.dim()));
  }
  a.model.project(a.src.matrix, a.tgt.matrix);
  return a;
}

// ---------------------------------------------------------------- align

struct AlignArgs {
  std::string src_emb, tgt_emb, seed_dict, out;
  std::size_t rounds = 3;
  std::size_t csls_k = 10;
  std::string metric = "csls";
  std::size_t max_rank = 0;
  std::size_t max_vocab = kDefaultMaxVocab;
};

void add_align(CLI::App& sub, AlignArgs& a) {
  sub.add_option("--src-emb", a.src_emb, "source embedding file")->required();
  sub.add_option("--tgt-emb", a.tgt_emb, "target embedding file")->required();
  sub.add_option("--seed-dict", a.seed_dict, "seed dictionary file, or 'identical'")->required();
  sub.add_option("--out", a.out, "alignment model output")->required();
  sub.add_option("--k", a.rounds, "refinement rounds");
  sub.add_option("--csls-k", a.csls_k, "CSLS neighbourhood size");
  sub.add_option("--metric", a.metric, "csls or cosine");
  sub.add_option("--max-rank", a.max_rank, "restrict refinement to the most frequent words (0 = all)");
  sub.add_option("--max-vocab", a.max_vocab, "read at most this many embedding rows");
}

int cmd_align(const AlignArgs& a, const Provenance& prov, std::ostream& err) {
  const EmbeddingSet x = normalize_rows(load_embeddings(a.src_emb, a.max_vocab));
  const EmbeddingSet y = normalize_rows(load_embeddings(a.tgt_emb, a.max_vocab));
  const SeedDictionary seed = a.seed_dict == "identical" ? identical_strings_dictionary(x.vocab, y.vocab)
                                                         : load_dictionary(a.seed_dict, x.vocab, y.vocab);
  err << "seed_dictionary=" << seed.size() << " dropped=" << seed.dropped << '\n';
  RefinementConfig cfg;
  cfg.rounds = a.rounds;
  cfg.metric = parse_metric(a.metric);
  cfg.csls_k = a.csls_k;
  if (a.max_rank > 0) cfg.max_rank = a.max_rank;
  const AlignmentModel m = refine(x, y, seed, cfg, [&](std::size_t round, std::size_t size) {
    err << "round=" << round << " dictionary_size=" << size << '\n';
  });
  std::vector<std::string> comments = prov.lines();
  std::string sizes;
  for (std::size_t s : m.dictionary_sizes) sizes += (sizes.empty() ? "" : ",") + std::to_string(s);
  comments.push_back("dictionary_sizes=" + sizes);
  save_alignment(m, a.out, comments);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", orthogonality_error(m.w));
  err << "orthogonality_error=" << buf << '\n';
  return 0;
}

// ---------------------------------------------------------------- translate

struct TranslateArgs {
  std::string corpus, out, mode = "translate";
  std::string align, src_emb, tgt_emb, lexicon, table_out;
  std::string caps_stats;
  double caps_threshold = kDefaultCapsThreshold;
  std::size_t csls_k = 10;
  std::size_t max_vocab = kDefaultMaxVocab;
  std::string emb_out, src_tagger_emb, tgt_tagger_emb;
};

void add_translate(CLI::App& sub, TranslateArgs& a) {
  sub.add_option("--corpus", a.corpus, "labeled source corpus (CoNLL)")->required();
  sub.add_option("--out", a.out, "output corpus (CoNLL)")->required();
  sub.add_option("--mode", a.mode, "translate, replace or common-space");
  sub.add_option("--align", a.align, "alignment model");
  sub.add_option("--src-emb", a.src_emb, "source translation embeddings");
  sub.add_option("--tgt-emb", a.tgt_emb, "target translation embeddings");
  sub.add_option("--lexicon", a.lexicon, "word translation table instead of --align");
  sub.add_option("--table-out", a.table_out, "write the CSLS translation table");
  sub.add_option("--caps-stats", a.caps_stats, "target capitalization statistics");
  sub.add_option("--caps-threshold", a.caps_threshold, "capitalize when P(capitalized) exceeds this");
  sub.add_option("--csls-k", a.csls_k, "CSLS neighbourhood size");
  sub.add_option("--max-vocab", a.max_vocab, "read at most this many embedding rows");
  sub.add_option("--emb-out", a.emb_out, "replace/common-space: tagger embeddings for the source corpus");
  sub.add_option("--src-tagger-emb", a.src_tagger_emb, "source tagger embeddings (default --src-emb)");
  sub.add_option("--tgt-tagger-emb", a.tgt_tagger_emb, "target tagger embeddings (default --tgt-emb)");
}

Vocabulary corpus_vocabulary(const LabeledCorpus& c) {
  Vocabulary v;
  for (const auto& s : c.sentences) {
    for (const auto& t : s.tokens) v.add(t);
  }
  return v;
}

int cmd_translate(const TranslateArgs& a, const Provenance& prov, std::ostream& err) {
  const TranslationMode mode = parse_translation_mode(a.mode);
  const LabeledCorpus corpus = read_conll(a.corpus);
  const bool need_lexicon = mode == TranslationMode::translate || (mode == TranslationMode::replace && !a.emb_out.empty());
  const bool have_alignment = !a.align.empty();
  if (need_lexicon && !have_alignment && a.lexicon.empty()) {
    throw ConfigError("mode " + a.mode + " needs --align with --src-emb/--tgt-emb, or --lexicon");
  }
  if (have_alignment && (a.src_emb.empty() || a.tgt_emb.empty())) {
    throw ConfigError("--align needs --src-emb and --tgt-emb");
  }

  Lexicon lexicon;
  if (need_lexicon || (have_alignment && !a.table_out.empty())) {
    if (!a.lexicon.empty()) {
      lexicon = load_lexicon(a.lexicon);
    } else {
      const AlignedSpaces s = load_aligned(a.align, a.src_emb, a.tgt_emb, a.max_vocab);
      const TranslationTable table = build_translation_table(s.model.xp, s.model.yp, a.csls_k);
      lexicon = Lexicon(table, s.src.vocab, s.tgt.vocab);
      if (!a.table_out.empty()) {
        std::ofstream out = open_output(a.table_out);
        write_translation_table(table, s.src.vocab, s.tgt.vocab, out, prov.lines());
      }
    }
  }

  if (mode == TranslationMode::translate) {
    CapitalizationStats stats;
    CapsPolicy caps;
    caps.threshold = a.caps_threshold;
    if (!a.caps_stats.empty()) {
      stats = load_capitalization_stats(a.caps_stats);
      caps.stats = &stats;
    }
    const LabeledCorpus translated = translate_corpus(corpus, lexicon, caps, mode);
    save_conll(translated, a.out);
    std::size_t changed = 0;
    for (std::size_t s = 0; s < corpus.size(); ++s) {
      for (std::size_t i = 0; i < corpus.sentences[s].size(); ++i) {
        changed += corpus.sentences[s].tokens[i] != translated.sentences[s].tokens[i];
      }
    }
    err << "tokens=" << corpus.token_count() << " translated=" << changed << '\n';
  } else {
    // Tokens are untouched in these modes; keep the file byte for byte.
    copy_file_bytes(a.corpus, a.out);
  }
  write_meta(a.out, prov);

  if (!a.emb_out.empty() && mode != TranslationMode::translate) {
    EmbeddingSet table;
    if (mode == TranslationMode::replace) {
      const std::string& tgt = a.tgt_tagger_emb.empty() ? a.tgt_emb : a.tgt_tagger_emb;
      if (tgt.empty()) throw ConfigError("replace mode needs --tgt-tagger-emb or --tgt-emb");
      const std::string& src = a.src_tagger_emb.empty() ? a.src_emb : a.src_tagger_emb;
      const Vocabulary vocab = src.empty() ? corpus_vocabulary(corpus) : load_embeddings(src, a.max_vocab).vocab;
      table = substitute_embeddings(vocab, lexicon, load_embeddings(tgt, a.max_vocab));
    } else {
      if (!have_alignment) throw ConfigError("common-space mode needs --align");
      const std::string& src = a.src_tagger_emb.empty() ? a.src_emb : a.src_tagger_emb;
      if (src.empty()) throw ConfigError("common-space mode needs --src-tagger-emb or --src-emb");
      table = project(load_embeddings(src, a.max_vocab), load_alignment(a.align).v);
    }
    save_embeddings(table, a.emb_out);
    write_meta(a.emb_out, prov);
    err << "tagger_embeddings=" << table.size() << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- caps-stats

struct CapsArgs {
  std::string corpus, out, format = "text";
};

void add_caps(CLI::App& sub, CapsArgs& a) {
  sub.add_option("--corpus", a.corpus, "monolingual target text")->required();
  sub.add_option("--out", a.out, "statistics output")->required();
  sub.add_option("--format", a.format, "text or conll");
}

int cmd_caps(const CapsArgs& a, const Provenance& prov, std::ostream& err) {
  if (a.format != "text" && a.format != "conll") throw ConfigError("unknown format '" + a.format + "'");
  const CapitalizationStats stats = build_capitalization_stats(read_tokens(a.corpus, a.format));
  std::ofstream out = open_output(a.out);
  write_capitalization_stats(stats, out, prov.lines());
  err << "words=" << stats.counts().size() << '\n';
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string train, dev, emb, dev_emb, out, log;
  std::size_t max_vocab = kDefaultMaxVocab;
  double holdout = 0.1;
  TrainConfig tc;
  TaggerConfig tg;
  std::string mode = "translate";
  std::string query_params = "separate";
  std::string hidden_size = "per-direction";
  double dropout = 0.5;
  double attn_dropout = -1.0;
  bool no_attention = false;
  bool lowercase_chars = false;
};

void add_train(CLI::App& sub, TrainArgs& a) {
  sub.add_option("--train", a.train, "training corpus (CoNLL)")->required();
  sub.add_option("--dev", a.dev, "development corpus (default: last 10% of --train)");
  sub.add_option("--emb", a.emb, "tagger word embeddings for the training corpus")->required();
  sub.add_option("--dev-emb", a.dev_emb, "tagger word embeddings for --dev (default --emb)");
  sub.add_option("--out", a.out, "checkpoint output")->required();
  sub.add_option("--log", a.log, "training log (default stderr)");
  sub.add_option("--max-vocab", a.max_vocab, "read at most this many embedding rows");
  sub.add_option("--holdout", a.holdout, "dev fraction held out when --dev is absent");
  sub.add_option("--epochs", a.tc.epochs, "training epochs");
  sub.add_option("--batch-size", a.tc.batch_size, "sentences per update");
  sub.add_option("--eval-every", a.tc.eval_every_batches, "dev evaluation interval in batches");
  sub.add_option("--lr", a.tc.lr0, "initial learning rate");
  sub.add_option("--decay", a.tc.decay_rho, "learning rate decay");
  sub.add_option("--momentum", a.tc.momentum, "SGD momentum");
  sub.add_option("--clip", a.tc.clip_norm, "global gradient norm limit (0 disables)");
  sub.add_option("--mode", a.mode, "translate, replace or common-space");
  sub.add_flag("--external-translation", a.tc.external_translation, "training data came from an external translator");
  sub.add_option("--char-emb-dim", a.tg.char_emb_dim, "character embedding size");
  sub.add_option("--char-hidden", a.tg.char_hidden, "character LSTM size per direction");
  sub.add_option("--word-hidden", a.tg.word_hidden, "word LSTM size");
  sub.add_option("--hidden-size", a.hidden_size, "per-direction or total");
  sub.add_option("--dropout", a.dropout, "input and word-LSTM output dropout");
  sub.add_option("--attn-dropout", a.attn_dropout, "attention output dropout (default 0.5, 0.2 if external)");
  sub.add_flag("--no-attention", a.no_attention, "drop the self-attention layer");
  sub.add_option("--query-params", a.query_params, "separate or shared");
  sub.add_flag("--lowercase-chars", a.lowercase_chars, "lowercase character inputs (implied by replace mode)");
}

int cmd_train(TrainArgs& a, std::uint64_t seed, const Provenance& prov, std::ostream& err) {
  a.tc.seed = seed;
  a.tc.mode = parse_translation_mode(a.mode);
  TaggerConfig tg = a.tg;
  if (a.query_params == "separate") tg.query_params = TaggerConfig::QueryParams::separate;
  else if (a.query_params == "shared") tg.query_params = TaggerConfig::QueryParams::shared;
  else throw ConfigError("unknown query-params '" + a.query_params + "'");
  if (a.hidden_size == "per-direction") tg.hidden_size = TaggerConfig::HiddenSize::per_direction;
  else if (a.hidden_size == "total") tg.hidden_size = TaggerConfig::HiddenSize::total;
  else throw ConfigError("unknown hidden-size '" + a.hidden_size + "'");
  tg.dropout_input = tg.dropout_word_out = a.dropout;
  tg.dropout_attn = a.attn_dropout >= 0.0 ? a.attn_dropout : a.tc.default_attention_dropout();
  tg.use_self_attention = !a.no_attention;
  tg.lowercase_chars = a.lowercase_chars || a.tc.mode == TranslationMode::replace;
  a.tc.validate();

  LabeledCorpus train_set = read_conll(a.train);
  LabeledCorpus dev_set;
  const WordTable words(load_embeddings(a.emb, a.max_vocab));
  WordTable dev_words;
  if (a.dev.empty()) {
    if (!(a.holdout > 0.0 && a.holdout < 1.0)) throw ConfigError("holdout must lie in (0, 1)");
    auto [tr, dv] = holdout_split(train_set, a.holdout);
    train_set = std::move(tr);
    dev_set = std::move(dv);
    dev_words = words;
  } else {
    dev_set = read_conll(a.dev);
    dev_words = a.dev_emb.empty() ? words : WordTable(load_embeddings(a.dev_emb, a.max_vocab));
  }

  std::ofstream log_file;
  std::ostream* log = &err;
  if (!a.log.empty()) {
    log_file = open_output(a.log);
    write_comments(log_file, prov.lines());
    log = &log_file;
  }
  TrainResult r = train(train_set, dev_set, words, dev_words, tg, a.tc, log);
  r.model.provenance = prov.lines();
  save_checkpoint(r.model, a.out);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", r.best_dev_f1);
  err << "best_dev_" << (r.selected_by_token_accuracy ? "token_accuracy" : "f1") << "=" << buf << '\n';
  return 0;
}

// ---------------------------------------------------------------- tag

struct TagArgs {
  std::string model, input, format = "conll", emb, align, side = "target", out;
  std::size_t max_vocab = kDefaultMaxVocab;
};

void add_tag(CLI::App& sub, TagArgs& a) {
  sub.add_option("--model", a.model, "tagger checkpoint")->required();
  sub.add_option("--input", a.input, "text to tag")->required();
  sub.add_option("--format", a.format, "conll or text");
  sub.add_option("--emb", a.emb, "word embeddings for the input language")->required();
  sub.add_option("--align", a.align, "alignment model: map --emb into the shared space");
  sub.add_option("--side", a.side, "which side of --align the embeddings are: source or target");
  sub.add_option("--out", a.out, "tagged CoNLL output")->required();
  sub.add_option("--max-vocab", a.max_vocab, "read at most this many embedding rows");
}

int cmd_tag(const TagArgs& a, const Provenance& prov, std::ostream& err) {
  if (a.format != "text" && a.format != "conll") throw ConfigError("unknown format '" + a.format + "'");
  if (a.side != "source" && a.side != "target") throw ConfigError("--side must be source or target");
  const TaggerModel model = load_checkpoint(a.model);
  EmbeddingSet emb = load_embeddings(a.emb, a.max_vocab);
  if (!a.align.empty()) {
    const AlignmentModel m = load_alignment(a.align);
    emb = project(emb, a.side == "target" ? m.u : m.v);
  }
  const LabeledCorpus input = read_input(a.input, a.format);
  const LabeledCorpus tagged = tag_corpus(model, input, WordTable(std::move(emb)));
  save_conll(tagged, a.out);
  write_meta(a.out, prov);
  err << "sentences=" << tagged.size() << " tokens=" << tagged.token_count() << '\n';
  return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvalArgs {
  std::string gold, pred, out, format = "table";
  bool iob1 = false;
};

void add_eval(CLI::App& sub, EvalArgs& a) {
  sub.add_option("--gold", a.gold, "gold CoNLL")->required();
  sub.add_option("--pred", a.pred, "predicted CoNLL")->required();
  sub.add_option("--out", a.out, "report file (default stdout)");
  sub.add_option("--format", a.format, "table or kv");
  sub.add_flag("--iob1", a.iob1, "convert both files from IOB1 before scoring");
}

int cmd_evaluate(const EvalArgs& a, const Provenance& prov, std::ostream& out) {
  if (a.format != "table" && a.format != "kv") throw ConfigError("unknown format '" + a.format + "'");
  LabeledCorpus gold = read_conll(a.gold);
  LabeledCorpus pred = read_conll(a.pred);
  if (a.iob1) {
    for (auto* c : {&gold, &pred}) {
      for (auto& s : c->sentences) s.tags = iob1_to_bio(s.tags);
    }
  }
  const EvalReport r = span_f1(gold, pred);
  std::ofstream file;
  std::ostream* o = &out;
  if (!a.out.empty()) {
    file = open_output(a.out);
    o = &file;
  }
  write_comments(*o, prov.lines());
  if (a.format == "kv") print_report_keyvalue(r, *o);
  else print_report_table(r, *o);
  return 0;
}

// ---------------------------------------------------------------- gradcheck

int cmd_gradcheck(std::uint64_t seed, const Provenance& prov, std::ostream& out) {
  write_comments(out, prov.lines());
  std::vector<GradcheckCase> cases = primitive_gradchecks(seed);
  cases.push_back(tagger_gradcheck(seed, true));
  cases.push_back(tagger_gradcheck(seed, false));
  bool ok = true;
  for (const auto& c : cases) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-24s max_rel_err=%.3e tol=%.0e %s", c.name.c_str(), c.result.max_relative_error,
                  c.tolerance, c.passed() ? "PASS" : "FAIL");
    out << buf << '\n';
    if (!c.passed()) {
      out << "  worst " << c.result.worst << '\n';
      ok = false;
    }
  }
  return ok ? 0 : 3;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string out_dir;
  SynthConfig cfg;
};

void add_synth(CLI::App& sub, SynthArgs& a) {
  sub.add_option("--out-dir", a.out_dir, "output directory")->required();
  sub.add_option("--vocab", a.cfg.vocab, "concepts per language");
  sub.add_option("--dim", a.cfg.dim, "embedding dimension");
  sub.add_option("--noise", a.cfg.noise, "Gaussian noise sigma on target vectors");
  sub.add_option("--entity-fraction", a.cfg.entity_fraction, "share of concepts that are entity words");
  sub.add_option("--train-sentences", a.cfg.train_sentences, "source training sentences");
  sub.add_option("--test-sentences", a.cfg.test_sentences, "target test sentences");
  sub.add_option("--seed-pairs", a.cfg.seed_pairs, "seed dictionary size");
  sub.add_option("--oov-rate", a.cfg.oov_rate, "share of test entity tokens without embeddings");
  sub.add_option("--unseen-rate", a.cfg.unseen_entity_rate, "share of entity words absent from training");
}

void write_pairs(const std::string& path, const std::vector<std::pair<std::string, std::string>>& pairs,
                 const Provenance& prov) {
  std::ofstream out = open_output(path);
  write_comments(out, prov.lines());
  for (const auto& [s, t] : pairs) out << s << ' ' << t << '\n';
}

int cmd_synth(SynthArgs& a, std::uint64_t seed, const Provenance& prov, std::ostream& err) {
  a.cfg.seed = seed;
  const SynthBenchmark b = make_synth_benchmark(a.cfg);
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  auto emit = [&](const std::string& name, auto&& writer) {
    const std::string p = (dir / name).string();
    writer(p);
    write_meta(p, prov);
  };
  emit("src.vec", [&](const std::string& p) { save_embeddings(b.source, p); });
  emit("tgt.vec", [&](const std::string& p) { save_embeddings(b.target, p); });
  emit("train.conll", [&](const std::string& p) { save_conll(b.source_train, p); });
  emit("test.conll", [&](const std::string& p) { save_conll(b.target_test, p); });
  emit("tgt.txt", [&](const std::string& p) {
    std::ofstream out = open_output(p);
    for (const auto& s : b.target_text) {
      for (std::size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
      out << '\n';
    }
  });
  std::vector<std::pair<std::string, std::string>> truth;
  for (std::size_t i = 0; i < b.truth.size(); ++i) {
    truth.emplace_back(b.source.vocab.word(i), b.target.vocab.word(b.truth[i]));
  }
  write_pairs((dir / "truth.dict").string(), truth, prov);
  write_pairs((dir / "seed.dict").string(), b.seed_dictionary, prov);
  err << "vocab=" << b.source.size() << " train_sentences=" << b.source_train.size()
      << " test_sentences=" << b.target_test.size() << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-lingual NER transfer: embedding alignment, corpus translation, tagger training"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "expand all help");

  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string config;

  AlignArgs align_args;
  TranslateArgs translate_args;
  CapsArgs caps_args;
  TrainArgs train_args;
  TagArgs tag_args;
  EvalArgs eval_args;
  SynthArgs synth_args;

  auto make = [&](const char* name, const char* desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--threads", threads, "worker threads (outputs do not depend on it)");
    sub->add_option("--config", config, "key=value file; flags override it");
    return sub;
  };
  CLI::App* align = make("align", "align two embedding spaces with Procrustes refinement");
  add_align(*align, align_args);
  CLI::App* translate = make("translate", "translate a labeled corpus word by word");
  add_translate(*translate, translate_args);
  CLI::App* caps = make("caps-stats", "capitalization statistics from target text");
  add_caps(*caps, caps_args);
  CLI::App* train_cmd = make("train", "train the tagger");
  add_train(*train_cmd, train_args);
  CLI::App* tag = make("tag", "tag text with a trained checkpoint");
  add_tag(*tag, tag_args);
  CLI::App* evaluate = make("evaluate", "span-level precision, recall and F1");
  add_eval(*evaluate, eval_args);
  CLI::App* gradcheck = make("gradcheck", "finite-difference gradient checks");
  CLI::App* synth = make("synth", "write a synthetic bilingual benchmark");
  add_synth(*synth, synth_args);

  try {
    std::vector<std::string> argv = args;
    // Config values go right after the subcommand name so later flags win.
    std::string config_path;
    for (std::size_t i = 0; i < argv.size(); ++i) {
      if (argv[i] == "--config" && i + 1 < argv.size()) config_path = argv[i + 1];
      else if (argv[i].rfind("--config=", 0) == 0) config_path = argv[i].substr(9);
    }
    if (!config_path.empty() && !argv.empty()) {
      CLI::App* sub = nullptr;
      for (CLI::App* s : app.get_subcommands({})) {
        if (s->get_name() == argv[0]) sub = s;
      }
      if (sub == nullptr) throw ConfigError("--config needs a subcommand first");
      std::vector<std::string> injected;
      for (const auto& [k, v] : read_config_file(config_path)) {
        if (k == "config") continue;
        if (sub->get_option_no_throw("--" + k) == nullptr) {
          err << "warning: config key '" << k << "' is not used by " << sub->get_name() << '\n';
          continue;
        }
        injected.push_back("--" + k + "=" + v);
      }
      argv.insert(argv.begin() + 1, injected.begin(), injected.end());
    }
    std::reverse(argv.begin(), argv.end());
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "error: " << e.what() << '\n';
    err << "run with --help for usage\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  }

  try {
    if (threads == 0) throw ConfigError("--threads must be at least 1");
    set_thread_count(threads);
    CLI::App* sub = app.get_subcommands().front();
    const Provenance prov = make_provenance(*sub, seed);
    if (sub == align) return cmd_align(align_args, prov, err);
    if (sub == translate) return cmd_translate(translate_args, prov, err);
    if (sub == caps) return cmd_caps(caps_args, prov, err);
    if (sub == train_cmd) return cmd_train(train_args, seed, prov, err);
    if (sub == tag) return cmd_tag(tag_args, prov, err);
    if (sub == evaluate) return cmd_evaluate(eval_args, prov, out);
    if (sub == gradcheck) return cmd_gradcheck(seed, prov, out);
    if (sub == synth) return cmd_synth(synth_args, seed, prov, err);
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace xner

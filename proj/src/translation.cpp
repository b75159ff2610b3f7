#include "xner/translation.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "xner/error.hpp"
#include "xner/parallel.hpp"
#include "xner/text.hpp"

namespace xner {

TranslationTable build_translation_table(const Matrix& xp, const Matrix& yp, const CslsIndex& index) {
  auto best = best_matches(xp, yp, 2.0, index.r_tgt);
  TranslationTable table;
  table.entries.resize(best.size());
  for (std::size_t i = 0; i < best.size(); ++i) {
    std::size_t j = best[i].index;
    table.entries[i] = {j, csls(i, j, index, xp, yp)};
  }
  return table;
}

TranslationTable build_translation_table(const Matrix& xp, const Matrix& yp, std::size_t csls_k) {
  return build_translation_table(xp, yp, build_csls_index(xp, yp, csls_k));
}

void write_translation_table(const TranslationTable& table, const Vocabulary& src, const Vocabulary& tgt,
                             std::ostream& out, const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  char buf[32];
  for (std::size_t i = 0; i < table.size(); ++i) {
    std::snprintf(buf, sizeof buf, " %.6f\n", table.entries[i].score);
    out << src.word(i) << ' ' << tgt.word(table.entries[i].target) << buf;
  }
}

Lexicon::Lexicon(const TranslationTable& table, const Vocabulary& src, const Vocabulary& tgt) {
  if (table.size() != src.size()) throw ConfigError("translation table does not cover the source vocabulary");
  for (std::size_t i = 0; i < table.size(); ++i) add(src.word(i), tgt.word(table.entries[i].target));
}

void Lexicon::add(std::string source, std::string target) { map_.emplace(std::move(source), std::move(target)); }

std::optional<std::string> Lexicon::translate(std::string_view token) const {
  auto it = map_.find(std::string(token));
  if (it == map_.end()) it = map_.find(text::lowercase(token));
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

Lexicon read_lexicon(std::istream& in, const std::string& name) {
  Lexicon lex;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (raw.empty() || raw.front() == '#') continue;
    auto f = text::split_ws(raw);
    if (f.empty()) continue;
    if (f.size() != 3) throw ParseError(name, lineno, "expected '<src> <tgt> <score>'");
    lex.add(f[0], f[1]);
  }
  return lex;
}

Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open translation table " + path);
  return read_lexicon(in, path);
}

void CapitalizationStats::observe(std::string_view token) {
  if (token.empty()) return;
  auto& c = counts_[text::lowercase(token)];
  ++c.total;
  std::u32string cps = text::decode_utf8(token);
  if (!cps.empty() && text::is_upper(cps.front())) ++c.capitalized;
}

std::optional<double> CapitalizationStats::probability(std::string_view word) const {
  auto it = counts_.find(text::lowercase(word));
  if (it == counts_.end() || it->second.total == 0) return std::nullopt;
  return static_cast<double>(it->second.capitalized) / static_cast<double>(it->second.total);
}

void CapitalizationStats::set(std::string word, Count c) { counts_[std::move(word)] = c; }

CapitalizationStats build_capitalization_stats(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw DataError("capitalization statistics need a nonempty corpus");
  CapitalizationStats s;
  for (const auto& t : tokens) s.observe(t);
  return s;
}

void write_capitalization_stats(const CapitalizationStats& stats, std::ostream& out,
                                const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  std::vector<const std::pair<const std::string, CapitalizationStats::Count>*> rows;
  for (const auto& kv : stats.counts()) rows.push_back(&kv);
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->first < b->first; });
  for (auto* kv : rows) out << kv->first << ' ' << kv->second.capitalized << ' ' << kv->second.total << '\n';
}

CapitalizationStats read_capitalization_stats(std::istream& in, const std::string& name) {
  CapitalizationStats s;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (raw.empty() || raw.front() == '#') continue;
    auto f = text::split_ws(raw);
    if (f.empty()) continue;
    CapitalizationStats::Count c;
    auto num = [&](const std::string& x, std::size_t& v) {
      auto [p, ec] = std::from_chars(x.data(), x.data() + x.size(), v);
      return ec == std::errc() && p == x.data() + x.size();
    };
    if (f.size() != 3 || !num(f[1], c.capitalized) || !num(f[2], c.total) || c.capitalized > c.total) {
      throw ParseError(name, lineno, "expected '<word> <cap_count> <total_count>'");
    }
    s.set(f[0], c);
  }
  return s;
}

CapitalizationStats load_capitalization_stats(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open capitalization statistics " + path);
  return read_capitalization_stats(in, path);
}

std::string apply_capitalization(std::string_view src_word, std::string_view tgt_word,
                                 const CapitalizationStats* stats, double threshold) {
  if (stats) {
    if (auto p = stats->probability(tgt_word)) {
      return *p > threshold ? text::capitalize_first(text::lowercase(tgt_word)) : text::lowercase(tgt_word);
    }
  }
  return text::apply_pattern(tgt_word, text::case_pattern(src_word));
}

TranslationMode parse_translation_mode(std::string_view s) {
  if (s == "translate") return TranslationMode::translate;
  if (s == "replace") return TranslationMode::replace;
  if (s == "common-space" || s == "common_space") return TranslationMode::common_space;
  throw ConfigError("unknown translation mode '" + std::string(s) + "' (translate, replace, common-space)");
}

std::string to_string(TranslationMode m) {
  switch (m) {
    case TranslationMode::translate:
      return "translate";
    case TranslationMode::replace:
      return "replace";
    case TranslationMode::common_space:
      break;
  }
  return "common-space";
}

LabeledCorpus translate_corpus(const LabeledCorpus& corpus, const Lexicon& lexicon, const CapsPolicy& caps,
                               TranslationMode mode) {
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    if (corpus.sentences[s].tokens.size() != corpus.sentences[s].tags.size()) {
      throw DataError("sentence " + std::to_string(s + 1) + " has mismatched token and tag counts");
    }
  }
  if (mode != TranslationMode::translate) return corpus;
  LabeledCorpus out = corpus;
  parallel_for(out.size(), 64, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      for (auto& tok : out.sentences[s].tokens) {
        if (auto t = lexicon.translate(tok)) tok = apply_capitalization(tok, *t, caps.stats, caps.threshold);
      }
    }
  });
  return out;
}

LabeledCorpus translate_corpus(const LabeledCorpus& corpus, const TranslationTable& table, const Vocabulary& src,
                               const Vocabulary& tgt, const CapsPolicy& caps, TranslationMode mode) {
  return translate_corpus(corpus, Lexicon(table, src, tgt), caps, mode);
}

EmbeddingSet substitute_embeddings(const Vocabulary& source, const Lexicon& lexicon, const EmbeddingSet& target) {
  EmbeddingSet out;
  std::vector<Eigen::Index> rows;
  for (const auto& w : source.words()) {
    auto t = lexicon.translate(w);
    if (!t) continue;
    auto j = target.lookup(*t);
    if (!j) continue;
    out.vocab.add(w);
    rows.push_back(static_cast<Eigen::Index>(*j));
  }
  if (rows.empty()) throw DataError("no source word has a translated target vector");
  out.matrix.resize(static_cast<Eigen::Index>(rows.size()), target.matrix.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.matrix.row(static_cast<Eigen::Index>(i)) = target.matrix.row(rows[i]);
  out.normalized = target.normalized;
  return out;
}

}  // namespace xner

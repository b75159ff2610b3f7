#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xner/corpus.hpp"
#include "xner/embeddings.hpp"
#include "xner/similarity.hpp"

namespace xner {

/// Probability above which corpus statistics capitalize a word.
inline constexpr double kDefaultCapsThreshold = 0.6;

struct TranslationEntry {
  std::size_t target = 0;
  double score = 0.0;  // CSLS value
};

/// Source index -> CSLS-best target; total over the source vocabulary.
struct TranslationTable {
  std::vector<TranslationEntry> entries;

  std::size_t size() const { return entries.size(); }
};

/// Per source word: argmax_t CSLS(x_s, y_t), lowest index on ties.
TranslationTable build_translation_table(const Matrix& xp, const Matrix& yp, std::size_t csls_k);
TranslationTable build_translation_table(const Matrix& xp, const Matrix& yp, const CslsIndex& index);

/// "<src> <tgt> <score:%.6f>" lines, preceded by '#' comment lines.
void write_translation_table(const TranslationTable& table, const Vocabulary& src, const Vocabulary& tgt,
                             std::ostream& out, const std::vector<std::string>& comments = {});

/// Surface-form word translations (what a table file holds).
class Lexicon {
 public:
  Lexicon() = default;
  Lexicon(const TranslationTable& table, const Vocabulary& src, const Vocabulary& tgt);

  void add(std::string source, std::string target);
  /// Exact source form first, then its lowercase.
  std::optional<std::string> translate(std::string_view token) const;
  std::size_t size() const { return map_.size(); }

 private:
  std::unordered_map<std::string, std::string> map_;
};

Lexicon read_lexicon(std::istream& in, const std::string& name);
Lexicon load_lexicon(const std::string& path);

/// Initial-uppercase frequency of each (lowercased) word in a monolingual corpus.
class CapitalizationStats {
 public:
  struct Count {
    std::size_t capitalized = 0;
    std::size_t total = 0;
  };

  void observe(std::string_view token);
  /// nullopt when the word never occurred.
  std::optional<double> probability(std::string_view word) const;
  const std::unordered_map<std::string, Count>& counts() const { return counts_; }
  void set(std::string word, Count c);

 private:
  std::unordered_map<std::string, Count> counts_;
};

/// Throws DataError on an empty token stream.
CapitalizationStats build_capitalization_stats(const std::vector<std::string>& tokens);

/// "<word> <cap_count> <total_count>" lines, sorted by word.
void write_capitalization_stats(const CapitalizationStats& stats, std::ostream& out,
                                const std::vector<std::string>& comments = {});
CapitalizationStats read_capitalization_stats(std::istream& in, const std::string& name);
CapitalizationStats load_capitalization_stats(const std::string& path);

/// Without stats (or when the word is unknown to them) the source token's
/// pattern is copied: ALL-CAPS, Initial, or lower. With stats the word is
/// capitalized iff its probability exceeds `threshold`.
std::string apply_capitalization(std::string_view src_word, std::string_view tgt_word,
                                 const CapitalizationStats* stats, double threshold = kDefaultCapsThreshold);

enum class TranslationMode { translate, replace, common_space };

TranslationMode parse_translation_mode(std::string_view s);
std::string to_string(TranslationMode m);

struct CapsPolicy {
  const CapitalizationStats* stats = nullptr;
  double threshold = kDefaultCapsThreshold;
};

/// translate: known tokens become their re-capitalized translation, unknown
/// tokens pass through verbatim. replace / common_space: tokens unchanged (the
/// substitution happens at the embedding layer). Tags are always copied.
LabeledCorpus translate_corpus(const LabeledCorpus& corpus, const Lexicon& lexicon, const CapsPolicy& caps,
                               TranslationMode mode);
LabeledCorpus translate_corpus(const LabeledCorpus& corpus, const TranslationTable& table, const Vocabulary& src,
                               const Vocabulary& tgt, const CapsPolicy& caps, TranslationMode mode);

/// Replace mode's tagger table: every source word whose translation has a
/// target vector gets that vector. Untranslatable words are left out and fall
/// back to the tagger's unknown vector.
EmbeddingSet substitute_embeddings(const Vocabulary& source, const Lexicon& lexicon, const EmbeddingSet& target);

}  // namespace xner

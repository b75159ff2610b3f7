#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace xner {

struct Sentence {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const Sentence&) const = default;
};

/// Sentences of (token, tag) pairs; |tokens| = |tags| per sentence.
struct LabeledCorpus {
  std::vector<Sentence> sentences;

  std::size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }
  std::size_t token_count() const;
  bool operator==(const LabeledCorpus&) const = default;
};

/// True for "O" and "B-X" / "I-X" with a nonempty type X.
bool is_valid_tag(std::string_view tag);

/// CoNLL columns: token first, tag last, blank line between sentences,
/// -DOCSTART- lines skipped. Throws ParseError on a malformed tag or line,
/// DataError on a file with no sentences.
LabeledCorpus read_conll(std::istream& in, const std::string& name);
LabeledCorpus read_conll(const std::string& path);

/// Unlabeled input for tagging: one sentence per line, whitespace tokens.
/// Tags are filled with "O".
LabeledCorpus read_plain_text(std::istream& in, const std::string& name);

/// "token tag" lines with a blank line after every sentence.
void write_conll(const LabeledCorpus& corpus, std::ostream& out);
void save_conll(const LabeledCorpus& corpus, const std::string& path);

/// Sorted tag inventory: "O" first, then the rest lexicographically.
std::vector<std::string> collect_tagset(const LabeledCorpus& corpus);

}  // namespace xner

#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "xner/corpus.hpp"

namespace xner {

/// Entity span [start, end) with its type.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;

  auto operator<=>(const Span&) const = default;
};

/// Rewrites IOB1 (B- only between adjacent same-type spans) into BIO.
std::vector<std::string> iob1_to_bio(const std::vector<std::string>& tags);

/// Maximal B-X (I-X)* runs. An I-X that does not continue a span of type X
/// starts a new span (conlleval's lenient reading); `ill_formed`, when given,
/// counts such occurrences.
std::vector<Span> extract_spans(const std::vector<std::string>& tags, std::size_t* ill_formed = nullptr);

/// Canonical BIO encoding of non-overlapping spans over `length` tokens.
std::vector<std::string> spans_to_bio(const std::vector<Span>& spans, std::size_t length);

struct Counts {
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;
};

double precision(const Counts& c);
double recall(const Counts& c);
double f1(const Counts& c);

/// Micro-averaged exact-match span scores with a per-type breakdown.
struct EvalReport {
  Counts total;
  std::map<std::string, Counts> per_type;
  std::size_t tokens = 0;
  std::size_t correct_tokens = 0;
  std::size_t ill_formed = 0;

  double precision() const { return xner::precision(total); }
  double recall() const { return xner::recall(total); }
  double f1() const { return xner::f1(total); }
  double token_accuracy() const;
};

/// Throws DataError if the corpora differ in sentence count or lengths.
EvalReport span_f1(const LabeledCorpus& gold, const LabeledCorpus& predicted);

void print_report_table(const EvalReport& r, std::ostream& out);
void print_report_keyvalue(const EvalReport& r, std::ostream& out);

}  // namespace xner

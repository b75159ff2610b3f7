#include "xner/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <set>

#include "xner/error.hpp"

namespace xner {

namespace {

std::string type_of(const std::string& tag) { return tag.size() > 2 ? tag.substr(2) : std::string(); }

}  // namespace

std::vector<std::string> iob1_to_bio(const std::vector<std::string>& tags) {
  std::vector<std::string> out = tags;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i].size() < 2 || tags[i][0] != 'I') continue;
    bool continues = i > 0 && tags[i - 1] != "O" && type_of(tags[i - 1]) == type_of(tags[i]);
    if (!continues) out[i] = "B-" + type_of(tags[i]);
  }
  return out;
}

std::vector<Span> extract_spans(const std::vector<std::string>& tags, std::size_t* ill_formed) {
  std::vector<Span> spans;
  bool open = false;
  Span cur;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string& t = tags[i];
    if (t == "O" || t.size() < 3) {
      if (open) spans.push_back(cur);
      open = false;
      continue;
    }
    std::string type = type_of(t);
    if (t[0] == 'I' && open && cur.label == type) {
      cur.end = i + 1;
      continue;
    }
    if (t[0] == 'I' && ill_formed) ++*ill_formed;
    if (open) spans.push_back(cur);
    cur = Span{i, i + 1, type};
    open = true;
  }
  if (open) spans.push_back(cur);
  return spans;
}

std::vector<std::string> spans_to_bio(const std::vector<Span>& spans, std::size_t length) {
  std::vector<std::string> tags(length, "O");
  for (const auto& s : spans) {
    for (std::size_t i = s.start; i < s.end && i < length; ++i) tags[i] = (i == s.start ? "B-" : "I-") + s.label;
  }
  return tags;
}

double precision(const Counts& c) {
  return c.predicted ? static_cast<double>(c.correct) / static_cast<double>(c.predicted) : 0.0;
}

double recall(const Counts& c) { return c.gold ? static_cast<double>(c.correct) / static_cast<double>(c.gold) : 0.0; }

double f1(const Counts& c) {
  double p = precision(c);
  double r = recall(c);
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

double EvalReport::token_accuracy() const {
  return tokens ? static_cast<double>(correct_tokens) / static_cast<double>(tokens) : 0.0;
}

EvalReport span_f1(const LabeledCorpus& gold, const LabeledCorpus& predicted) {
  if (gold.size() != predicted.size()) {
    throw DataError("gold has " + std::to_string(gold.size()) + " sentences, prediction has " +
                    std::to_string(predicted.size()));
  }
  EvalReport r;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto& g = gold.sentences[s].tags;
    const auto& p = predicted.sentences[s].tags;
    if (g.size() != p.size()) {
      throw DataError("sentence " + std::to_string(s + 1) + " differs in length between gold and prediction");
    }
    for (std::size_t i = 0; i < g.size(); ++i) r.correct_tokens += g[i] == p[i];
    r.tokens += g.size();
    auto gs = extract_spans(g);
    auto ps = extract_spans(p, &r.ill_formed);
    std::set<Span> gold_set(gs.begin(), gs.end());
    for (const auto& sp : gs) {
      ++r.total.gold;
      ++r.per_type[sp.label].gold;
    }
    for (const auto& sp : ps) {
      ++r.total.predicted;
      ++r.per_type[sp.label].predicted;
      if (gold_set.count(sp)) {
        ++r.total.correct;
        ++r.per_type[sp.label].correct;
      }
    }
  }
  return r;
}

void print_report_table(const EvalReport& r, std::ostream& out) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %9s %9s %9s %7s %7s %7s\n", "type", "precision", "recall", "f1", "gold",
                "pred", "correct");
  out << buf;
  auto row = [&](const std::string& name, const Counts& c) {
    std::snprintf(buf, sizeof buf, "%-12s %9.4f %9.4f %9.4f %7zu %7zu %7zu\n", name.c_str(), precision(c), recall(c),
                  f1(c), c.gold, c.predicted, c.correct);
    out << buf;
  };
  for (const auto& [type, c] : r.per_type) row(type, c);
  row("overall", r.total);
}

void print_report_keyvalue(const EvalReport& r, std::ostream& out) {
  char buf[96];
  auto kv = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s=%.6f\n", key, v);
    out << buf;
  };
  kv("precision", r.precision());
  kv("recall", r.recall());
  kv("f1", r.f1());
  kv("token_accuracy", r.token_accuracy());
  out << "gold=" << r.total.gold << "\npredicted=" << r.total.predicted << "\ncorrect=" << r.total.correct << '\n';
  for (const auto& [type, c] : r.per_type) {
    std::snprintf(buf, sizeof buf, "f1.%s=%.6f\n", type.c_str(), f1(c));
    out << buf;
  }
}

}  // namespace xner

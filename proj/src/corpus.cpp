#include "xner/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "xner/error.hpp"
#include "xner/text.hpp"

namespace xner {

std::size_t LabeledCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

bool is_valid_tag(std::string_view tag) {
  if (tag == "O") return true;
  return tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-';
}

LabeledCorpus read_conll(std::istream& in, const std::string& name) {
  LabeledCorpus corpus;
  Sentence current;
  std::string raw;
  std::size_t lineno = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) corpus.sentences.push_back(std::move(current));
    current = Sentence{};
  };
  while (std::getline(in, raw)) {
    ++lineno;
    auto f = text::split_ws(raw);
    if (f.empty()) {
      flush();
      continue;
    }
    if (f[0] == "-DOCSTART-") {
      flush();
      continue;
    }
    if (f.size() < 2) throw ParseError(name, lineno, "expected at least a token and a tag column");
    if (!is_valid_tag(f.back())) throw ParseError(name, lineno, "malformed tag '" + f.back() + "'");
    current.tokens.push_back(f.front());
    current.tags.push_back(f.back());
  }
  flush();
  if (corpus.empty()) throw DataError(name + ": no sentences");
  return corpus;
}

LabeledCorpus read_conll(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path);
  return read_conll(in, path);
}

LabeledCorpus read_plain_text(std::istream& in, const std::string& name) {
  LabeledCorpus corpus;
  std::string raw;
  while (std::getline(in, raw)) {
    auto toks = text::split_ws(raw);
    if (toks.empty()) continue;
    Sentence s;
    s.tags.assign(toks.size(), "O");
    s.tokens = std::move(toks);
    corpus.sentences.push_back(std::move(s));
  }
  if (corpus.empty()) throw DataError(name + ": no sentences");
  return corpus;
}

void write_conll(const LabeledCorpus& corpus, std::ostream& out) {
  for (const auto& s : corpus.sentences) {
    for (std::size_t i = 0; i < s.size(); ++i) out << s.tokens[i] << ' ' << s.tags[i] << '\n';
    out << '\n';
  }
}

void save_conll(const LabeledCorpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  write_conll(corpus, out);
}

std::vector<std::string> collect_tagset(const LabeledCorpus& corpus) {
  std::set<std::string> tags;
  for (const auto& s : corpus.sentences) tags.insert(s.tags.begin(), s.tags.end());
  tags.erase("O");
  std::vector<std::string> out{"O"};
  out.insert(out.end(), tags.begin(), tags.end());
  return out;
}

}  // namespace xner

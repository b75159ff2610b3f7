#include "xner/checkpoint.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "xner/error.hpp"
#include "xner/text.hpp"

namespace xner {

namespace {

constexpr const char* kMagic = "xner-tagger 1";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_tensor(std::ostream& out, const std::string& name, const ad::Tensor& t) {
  out << "tensor " << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    for (Eigen::Index j = 0; j < t.cols(); ++j) out << (j ? " " : "") << fmt(t(i, j));
    out << '\n';
  }
}

struct Reader {
  std::istream& in;
  const std::string& name;
  std::size_t lineno = 0;

  std::vector<std::string> next(bool allow_eof = false) {
    std::string raw;
    while (std::getline(in, raw)) {
      ++lineno;
      if (raw.empty()) continue;
      return text::split_ws(raw);
    }
    if (!allow_eof) fail("unexpected end of file");
    return {};
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(name, lineno, what); }

  std::size_t size(const std::string& s) const {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail("expected an unsigned integer, got '" + s + "'");
    return v;
  }

  double real(const std::string& s) const {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) fail("bad number '" + s + "'");
    return v;
  }
};

}  // namespace

void write_checkpoint(const TaggerModel& model, std::ostream& out) {
  const TaggerConfig& c = model.config;
  out << kMagic << '\n';
  for (const auto& p : model.provenance) out << "# " << p << '\n';
  out << "config char_emb_dim " << c.char_emb_dim << '\n';
  out << "config char_hidden " << c.char_hidden << '\n';
  out << "config word_hidden " << c.word_hidden << '\n';
  out << "config word_emb_dim " << c.word_emb_dim << '\n';
  out << "config dropout_input " << fmt(c.dropout_input) << '\n';
  out << "config dropout_word_out " << fmt(c.dropout_word_out) << '\n';
  out << "config dropout_attn " << fmt(c.dropout_attn) << '\n';
  out << "config use_self_attention " << (c.use_self_attention ? 1 : 0) << '\n';
  out << "config query_params "
      << (c.query_params == TaggerConfig::QueryParams::separate ? "separate" : "shared") << '\n';
  out << "config hidden_size "
      << (c.hidden_size == TaggerConfig::HiddenSize::per_direction ? "per_direction" : "total") << '\n';
  out << "config lowercase_chars " << (c.lowercase_chars ? 1 : 0) << '\n';
  out << "tagset " << c.tagset.size();
  for (const auto& t : c.tagset) out << ' ' << t;
  out << '\n';
  out << "chars " << model.chars.chars().size();
  for (char32_t cp : model.chars.chars()) out << ' ' << static_cast<unsigned long>(cp);
  out << '\n';
  for (const ad::Parameter* p : model.parameters()) write_tensor(out, p->name, p->value);
  write_tensor(out, "unknown_word", model.unknown_word);
  out << "end\n";
}

void save_checkpoint(const TaggerModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  write_checkpoint(model, out);
}

TaggerModel read_checkpoint(std::istream& in, const std::string& name) {
  Reader r{in, name};
  std::string first;
  if (!std::getline(in, first) || text::chomp(first) != kMagic) {
    r.lineno = 1;
    r.fail("not an xner tagger checkpoint");
  }
  r.lineno = 1;
  std::vector<std::string> provenance;
  TaggerConfig c;
  std::vector<char32_t> chars;
  std::map<std::string, ad::Tensor> tensors;
  std::vector<std::string> f;
  for (;;) {
    std::string raw;
    if (!std::getline(in, raw)) r.fail("missing 'end'");
    ++r.lineno;
    std::string_view line = text::chomp(raw);
    if (line.substr(0, 2) == "# ") {
      provenance.emplace_back(line.substr(2));
      continue;
    }
    f = text::split_ws(line);
    if (f.empty()) continue;
    if (f[0] == "end") break;
    if (f[0] == "config") {
      if (f.size() != 3) r.fail("expected 'config <key> <value>'");
      const std::string& k = f[1];
      const std::string& v = f[2];
      if (k == "char_emb_dim") c.char_emb_dim = r.size(v);
      else if (k == "char_hidden") c.char_hidden = r.size(v);
      else if (k == "word_hidden") c.word_hidden = r.size(v);
      else if (k == "word_emb_dim") c.word_emb_dim = r.size(v);
      else if (k == "dropout_input") c.dropout_input = r.real(v);
      else if (k == "dropout_word_out") c.dropout_word_out = r.real(v);
      else if (k == "dropout_attn") c.dropout_attn = r.real(v);
      else if (k == "use_self_attention") c.use_self_attention = r.size(v) != 0;
      else if (k == "lowercase_chars") c.lowercase_chars = r.size(v) != 0;
      else if (k == "query_params") {
        if (v != "separate" && v != "shared") r.fail("bad query_params '" + v + "'");
        c.query_params = v == "separate" ? TaggerConfig::QueryParams::separate : TaggerConfig::QueryParams::shared;
      } else if (k == "hidden_size") {
        if (v != "per_direction" && v != "total") r.fail("bad hidden_size '" + v + "'");
        c.hidden_size =
            v == "per_direction" ? TaggerConfig::HiddenSize::per_direction : TaggerConfig::HiddenSize::total;
      } else {
        r.fail("unknown config key '" + k + "'");
      }
    } else if (f[0] == "tagset") {
      if (f.size() < 2 || r.size(f[1]) != f.size() - 2) r.fail("tagset count mismatch");
      c.tagset.assign(f.begin() + 2, f.end());
    } else if (f[0] == "chars") {
      if (f.size() < 2 || r.size(f[1]) != f.size() - 2) r.fail("chars count mismatch");
      for (std::size_t k = 2; k < f.size(); ++k) chars.push_back(static_cast<char32_t>(r.size(f[k])));
    } else if (f[0] == "tensor") {
      if (f.size() != 4) r.fail("expected 'tensor <name> <rows> <cols>'");
      const std::string tname = f[1];
      const std::size_t rows = r.size(f[2]);
      const std::size_t cols = r.size(f[3]);
      ad::Tensor t(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
      for (std::size_t i = 0; i < rows; ++i) {
        auto vals = r.next();
        if (vals.size() != cols) r.fail("tensor " + tname + ": expected " + std::to_string(cols) + " values");
        for (std::size_t j = 0; j < cols; ++j) {
          t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r.real(vals[j]);
        }
      }
      tensors[tname] = std::move(t);
    } else {
      r.fail("unexpected record '" + f[0] + "'");
    }
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    r.fail(e.what());
  }
  TaggerModel m = TaggerModel::create(c, CharVocabulary(std::move(chars)), 0);
  m.provenance = std::move(provenance);
  auto assign = [&](const std::string& tname, ad::Tensor& dst) {
    auto it = tensors.find(tname);
    if (it == tensors.end()) r.fail("missing tensor " + tname);
    if (it->second.rows() != dst.rows() || it->second.cols() != dst.cols()) {
      r.fail("tensor " + tname + " has shape " + std::to_string(it->second.rows()) + "x" +
             std::to_string(it->second.cols()) + ", expected " + std::to_string(dst.rows()) + "x" +
             std::to_string(dst.cols()));
    }
    dst = it->second;
  };
  for (ad::Parameter* p : m.parameters()) assign(p->name, p->value);
  ad::Tensor unk = m.unknown_word;
  assign("unknown_word", unk);
  m.unknown_word = unk.row(0);
  return m;
}

TaggerModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  return read_checkpoint(in, path);
}

}  // namespace xner

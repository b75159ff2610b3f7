#include "xner/alignment.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "xner/error.hpp"
#include "xner/text.hpp"

namespace xner {

SeedDictionary identical_strings_dictionary(const Vocabulary& src, const Vocabulary& tgt) {
  SeedDictionary d;
  d.source = DictionarySource::identical_strings;
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (auto j = tgt.find(src.word(i))) d.pairs.emplace_back(i, *j);
  }
  if (d.empty()) {
    throw DataError("the vocabularies share no identical strings; supply a seed dictionary file instead");
  }
  return d;
}

SeedDictionary read_dictionary(std::istream& in, const std::string& name, const Vocabulary& src,
                               const Vocabulary& tgt) {
  SeedDictionary d;
  d.source = DictionarySource::provided_file;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = text::chomp(raw);
    if (line.empty() || line.front() == '#') continue;
    auto f = text::split_ws(line);
    if (f.empty()) continue;
    if (f.size() != 2) throw ParseError(name, lineno, "expected '<source> <target>'");
    auto i = src.find(f[0]);
    auto j = tgt.find(f[1]);
    if (!i || !j) {
      ++d.dropped;
      continue;
    }
    if (seen.emplace(*i, *j).second) d.pairs.emplace_back(*i, *j);
  }
  if (d.empty()) {
    throw DataError(name + ": no dictionary pair has both words in vocabulary (" + std::to_string(d.dropped) +
                    " dropped)");
  }
  return d;
}

SeedDictionary load_dictionary(const std::string& path, const Vocabulary& src, const Vocabulary& tgt) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dictionary file " + path);
  return read_dictionary(in, path, src, tgt);
}

ProcrustesSolution solve_procrustes(const Matrix& xd, const Matrix& yd) {
  if (xd.cols() == 0) throw ConfigError("Procrustes over zero-dimensional embeddings");
  if (xd.rows() == 0) throw DataError("Procrustes over an empty dictionary");
  if (xd.rows() != yd.rows() || xd.cols() != yd.cols()) {
    throw ConfigError("Procrustes inputs differ in shape");
  }
  if (!xd.allFinite() || !yd.allFinite()) throw NumericalError("non-finite value in Procrustes input");
  Eigen::MatrixXd cross = yd.transpose() * xd;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ProcrustesSolution s;
  s.u = svd.matrixU();
  s.v = svd.matrixV();
  s.w = s.u * s.v.transpose();
  if (!s.w.allFinite()) throw NumericalError("SVD produced non-finite factors");
  return s;
}

double procrustes_objective(const Matrix& w, const Matrix& xd, const Matrix& yd) {
  // Rows are x_i^T, so (W x_i)^T = x_i^T W^T.
  return (xd * w.transpose() - yd).squaredNorm();
}

double orthogonality_error(const Matrix& m) {
  return (m * m.transpose() - Matrix::Identity(m.rows(), m.rows())).norm();
}

void AlignmentModel::project(const Matrix& x, const Matrix& y) {
  xp = x * v;
  yp = y * u;
}

SeedDictionary mutual_nearest_neighbors(const Matrix& xp, const Matrix& yp, SimilarityMetric metric,
                                        std::size_t csls_k, std::optional<std::size_t> max_rank) {
  Eigen::Index ns = xp.rows();
  Eigen::Index nt = yp.rows();
  if (max_rank) {
    ns = std::min<Eigen::Index>(ns, static_cast<Eigen::Index>(*max_rank));
    nt = std::min<Eigen::Index>(nt, static_cast<Eigen::Index>(*max_rank));
  }
  Matrix xs = xp.topRows(ns);
  Matrix ys = yp.topRows(nt);

  std::vector<double> src_penalty, tgt_penalty;
  double scale = 1.0;
  if (metric == SimilarityMetric::csls) {
    CslsIndex index = build_csls_index(xs, ys, csls_k);
    src_penalty = std::move(index.r_src);
    tgt_penalty = std::move(index.r_tgt);
    scale = 2.0;
  }
  // The query-side r term is constant per row and does not move the argmax.
  auto forward = best_matches(xs, ys, scale, tgt_penalty);
  auto backward = best_matches(ys, xs, scale, src_penalty);

  SeedDictionary d;
  d.source = DictionarySource::refinement_round;
  for (std::size_t i = 0; i < forward.size(); ++i) {
    std::size_t j = forward[i].index;
    if (backward[j].index == i) d.pairs.emplace_back(i, j);
  }
  return d;
}

namespace {

void gather(const Matrix& x, const Matrix& y, const SeedDictionary& dict, Matrix& xd, Matrix& yd) {
  xd.resize(static_cast<Eigen::Index>(dict.size()), x.cols());
  yd.resize(static_cast<Eigen::Index>(dict.size()), y.cols());
  for (std::size_t r = 0; r < dict.size(); ++r) {
    auto [i, j] = dict.pairs[r];
    if (i >= static_cast<std::size_t>(x.rows()) || j >= static_cast<std::size_t>(y.rows())) {
      throw DataError("dictionary index out of range");
    }
    xd.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(i));
    yd.row(static_cast<Eigen::Index>(r)) = y.row(static_cast<Eigen::Index>(j));
  }
}

}  // namespace

AlignmentModel refine(const EmbeddingSet& x, const EmbeddingSet& y, const SeedDictionary& seed,
                      const RefinementConfig& cfg, const RoundCallback& on_round) {
  if (!x.normalized || !y.normalized) throw ConfigError("alignment requires row-normalized embeddings");
  if (x.dim() != y.dim()) {
    throw ConfigError("source and target embeddings differ in dimension (" + std::to_string(x.dim()) + " vs " +
                      std::to_string(y.dim()) + ")");
  }
  if (seed.empty()) throw DataError("empty seed dictionary");
  if (cfg.csls_k == 0) throw ConfigError("CSLS neighbourhood size must be >= 1");

  AlignmentModel model;
  Matrix xd, yd;
  gather(x.matrix, y.matrix, seed, xd, yd);
  auto sol = solve_procrustes(xd, yd);
  model.u = sol.u;
  model.v = sol.v;
  model.w = sol.w;
  model.project(x.matrix, y.matrix);
  model.dictionary_sizes.push_back(seed.size());
  if (on_round) on_round(0, seed.size());

  for (std::size_t round = 1; round <= cfg.rounds; ++round) {
    SeedDictionary dict = mutual_nearest_neighbors(model.xp, model.yp, cfg.metric, cfg.csls_k, cfg.max_rank);
    if (dict.empty()) {
      throw NumericalError("refinement round " + std::to_string(round) + " produced an empty dictionary");
    }
    gather(x.matrix, y.matrix, dict, xd, yd);
    sol = solve_procrustes(xd, yd);
    model.u = sol.u;
    model.v = sol.v;
    model.w = sol.w;
    model.project(x.matrix, y.matrix);
    model.round = round;
    model.dictionary_sizes.push_back(dict.size());
    if (on_round) on_round(round, dict.size());
  }
  return model;
}

namespace {

void write_matrix(std::ostream& out, const Matrix& m) {
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      std::snprintf(buf, sizeof buf, "%s%.17g", k ? " " : "", m(i, k));
      out << buf;
    }
    out << '\n';
  }
}

bool next_content_line(std::istream& in, std::string& raw, std::size_t& lineno) {
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view s = text::chomp(raw);
    if (!s.empty() && s.front() != '#') return true;
  }
  return false;
}

std::size_t read_keyed(std::istream& in, const std::string& name, const char* key, std::size_t& lineno) {
  std::string raw;
  if (!next_content_line(in, raw, lineno)) throw ParseError(name, lineno, std::string("missing '") + key + "'");
  auto f = text::split_ws(raw);
  std::size_t value = 0;
  if (f.size() != 2 || f[0] != key ||
      std::from_chars(f[1].data(), f[1].data() + f[1].size(), value).ec != std::errc()) {
    throw ParseError(name, lineno, std::string("expected '") + key + " <n>'");
  }
  return value;
}

Matrix read_matrix(std::istream& in, const std::string& name, std::size_t d, std::size_t& lineno) {
  Matrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  std::string raw;
  for (std::size_t i = 0; i < d; ++i) {
    if (!next_content_line(in, raw, lineno)) throw ParseError(name, lineno, "truncated matrix");
    auto f = text::split_ws(raw);
    if (f.size() != d) throw ParseError(name, lineno, "expected " + std::to_string(d) + " values");
    for (std::size_t k = 0; k < d; ++k) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f[k].data(), f[k].data() + f[k].size(), v);
      if (ec != std::errc() || ptr != f[k].data() + f[k].size() || !std::isfinite(v)) {
        throw ParseError(name, lineno, "bad value '" + f[k] + "'");
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
    }
  }
  return m;
}

}  // namespace

void write_alignment(const AlignmentModel& model, std::ostream& out, const std::vector<std::string>& comments) {
  out << "# xner alignment model\n";
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "dim " << model.dim() << '\n';
  out << "round " << model.round << '\n';
  out << "# U\n";
  write_matrix(out, model.u);
  out << "# V\n";
  write_matrix(out, model.v);
}

void save_alignment(const AlignmentModel& model, const std::string& path, const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  write_alignment(model, out, comments);
}

AlignmentModel read_alignment(std::istream& in, const std::string& name) {
  std::size_t lineno = 0;
  AlignmentModel m;
  std::size_t d = read_keyed(in, name, "dim", lineno);
  if (d == 0) throw ParseError(name, lineno, "dimension must be positive");
  m.round = read_keyed(in, name, "round", lineno);
  m.u = read_matrix(in, name, d, lineno);
  m.v = read_matrix(in, name, d, lineno);
  m.w = m.u * m.v.transpose();
  return m;
}

AlignmentModel load_alignment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open alignment model " + path);
  return read_alignment(in, path);
}

}  // namespace xner

#include "xner/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>

#include "xner/error.hpp"

namespace xner::ad {

Parameter::Parameter(std::string name_, Tensor value_, bool requires_grad_)
    : name(std::move(name_)), value(std::move(value_)), requires_grad(requires_grad_) {
  grad = Tensor::Zero(value.rows(), value.cols());
}

void Parameter::zero_grad() {
  if (grad.rows() != value.rows() || grad.cols() != value.cols()) grad.resize(value.rows(), value.cols());
  grad.setZero();
}

const Tensor& Var::value() const { return graph->value(*this); }

Var Graph::constant(Tensor value) { return emit(std::move(value), {}, nullptr, "constant"); }

Var Graph::variable(Tensor value) {
  Var v = emit(std::move(value), {}, nullptr, "variable");
  nodes_[v.id].requires_grad = true;
  return v;
}

Var Graph::param(Parameter& p) {
  Var v = emit(p.value, {}, nullptr, "param");
  nodes_[v.id].param = &p;
  nodes_[v.id].requires_grad = p.requires_grad;
  return v;
}

const Tensor* Graph::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (!n.requires_grad || n.grad.size() == 0) return nullptr;
  return &n.grad;
}

Tensor* Graph::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return nullptr;
  if (n.grad.size() == 0) n.grad = Tensor::Zero(n.value.rows(), n.value.cols());
  return &n.grad;
}

Var Graph::emit(Tensor value, std::vector<std::size_t> parents, BackwardFn fn, const char* op) {
  if (!value.allFinite()) throw NumericalError(std::string("non-finite value produced by ") + op);
  Node n;
  n.value = std::move(value);
  for (std::size_t p : parents) n.requires_grad = n.requires_grad || nodes_[p].requires_grad;
  n.parents = std::move(parents);
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{this, nodes_.size() - 1};
}

void Graph::backward(Var loss) {
  if (loss.graph != this) throw std::invalid_argument("backward: loss belongs to another graph");
  Node& root = nodes_[loss.id];
  if (root.value.rows() != 1 || root.value.cols() != 1) {
    throw std::invalid_argument("backward: loss must be 1x1, got " + std::to_string(root.value.rows()) + "x" +
                                std::to_string(root.value.cols()));
  }
  if (!root.requires_grad) return;
  root.grad = Tensor::Constant(1, 1, 1.0);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, i);
    if (n.param) {
      Parameter& p = *n.param;
      if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) p.zero_grad();
      p.grad += n.grad;
    }
  }
}

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " + std::to_string(a.rows()) + "x" +
                              std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                              std::to_string(b.cols()));
}

void check_same_graph(Var a, Var b) {
  if (a.graph != b.graph) throw std::invalid_argument("operands belong to different graphs");
}

// C = A B with every C(i, j) accumulated over k in increasing order, so a row
// of C depends only on the matching row of A.
Tensor gemm_rows(const Tensor& a, const Tensor& b) {
  const Eigen::Index n = a.rows(), k = a.cols(), m = b.cols();
  Tensor c = Tensor::Zero(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    double* ci = c.data() + i * m;
    const double* ai = a.data() + i * k;
    for (Eigen::Index t = 0; t < k; ++t) {
      const double av = ai[t];
      const double* bt = b.data() + t * m;
      for (Eigen::Index j = 0; j < m; ++j) ci[j] += av * bt[j];
    }
  }
  return c;
}

void matmul_backward(Graph& g, std::size_t self) {
  const std::size_t ia = g.parent(self, 0), ib = g.parent(self, 1);
  const Tensor& dc = g.grad_of(self);
  if (Tensor* da = g.grad_buffer(ia)) da->noalias() += dc * g.value_of(ib).transpose();
  if (Tensor* db = g.grad_buffer(ib)) db->noalias() += g.value_of(ia).transpose() * dc;
}

}  // namespace

double canonical_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

Var matmul(Var a, Var b) {
  check_same_graph(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) shape_error("matmul", av, bv);
  return a.graph->emit(gemm_rows(av, bv), {a.id, b.id}, matmul_backward, "matmul");
}

Var matmul_order_invariant(Var a, Var b) {
  check_same_graph(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) shape_error("matmul_order_invariant", av, bv);
  Tensor c(av.rows(), bv.cols());
  std::vector<double> terms(static_cast<std::size_t>(av.cols()));
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      for (Eigen::Index k = 0; k < av.cols(); ++k) terms[static_cast<std::size_t>(k)] = av(i, k) * bv(k, j);
      c(i, j) = canonical_sum(terms);
    }
  }
  return a.graph->emit(std::move(c), {a.id, b.id}, matmul_backward, "matmul_order_invariant");
}

Var add(Var a, Var b) {
  check_same_graph(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rows() == bv.rows() && av.cols() == bv.cols()) {
    return a.graph->emit(av + bv, {a.id, b.id}, [](Graph& g, std::size_t self) {
      for (int k = 0; k < 2; ++k) {
        if (Tensor* d = g.grad_buffer(g.parent(self, k))) *d += g.grad_of(self);
      }
    }, "add");
  }
  // Broadcast a single row over the other operand's rows.
  const bool b_row = bv.rows() == 1 && bv.cols() == av.cols();
  const bool a_row = av.rows() == 1 && av.cols() == bv.cols();
  if (!b_row && !a_row) shape_error("add", av, bv);
  Var full = b_row ? a : b;
  Var rowv = b_row ? b : a;
  Tensor out = full.value();
  out.rowwise() += rowv.value().row(0);
  return a.graph->emit(std::move(out), {full.id, rowv.id}, [](Graph& g, std::size_t self) {
    const Tensor& d = g.grad_of(self);
    if (Tensor* df = g.grad_buffer(g.parent(self, 0))) *df += d;
    if (Tensor* dr = g.grad_buffer(g.parent(self, 1))) *dr += d.colwise().sum();
  }, "add");
}

Var mul(Var a, Var b) {
  check_same_graph(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) shape_error("mul", av, bv);
  return a.graph->emit(av.cwiseProduct(bv), {a.id, b.id}, [](Graph& g, std::size_t self) {
    const std::size_t ia = g.parent(self, 0), ib = g.parent(self, 1);
    const Tensor& d = g.grad_of(self);
    if (Tensor* da = g.grad_buffer(ia)) *da += d.cwiseProduct(g.value_of(ib));
    if (Tensor* db = g.grad_buffer(ib)) *db += d.cwiseProduct(g.value_of(ia));
  }, "mul");
}

Var scale(Var a, double c) {
  return a.graph->emit(a.value() * c, {a.id}, [c](Graph& g, std::size_t self) {
    if (Tensor* d = g.grad_buffer(g.parent(self, 0))) *d += c * g.grad_of(self);
  }, "scale");
}

Var tanh(Var a) {
  Tensor y = a.value().array().tanh().matrix();
  return a.graph->emit(std::move(y), {a.id}, [](Graph& g, std::size_t self) {
    const Tensor& y = g.value_of(self);
    if (Tensor* d = g.grad_buffer(g.parent(self, 0))) {
      *d += (g.grad_of(self).array() * (1.0 - y.array().square())).matrix();
    }
  }, "tanh");
}

Var sigmoid(Var a) {
  Tensor y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return a.graph->emit(std::move(y), {a.id}, [](Graph& g, std::size_t self) {
    const Tensor& y = g.value_of(self);
    if (Tensor* d = g.grad_buffer(g.parent(self, 0))) {
      *d += (g.grad_of(self).array() * y.array() * (1.0 - y.array())).matrix();
    }
  }, "sigmoid");
}

Var softmax(Var a) {
  const Tensor& x = a.value();
  Tensor y(x.rows(), x.cols());
  std::vector<double> e(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).maxCoeff();
    for (Eigen::Index j = 0; j < x.cols(); ++j) e[static_cast<std::size_t>(j)] = std::exp(x(i, j) - m);
    const double z = canonical_sum(e);
    for (Eigen::Index j = 0; j < x.cols(); ++j) y(i, j) = e[static_cast<std::size_t>(j)] / z;
  }
  return a.graph->emit(std::move(y), {a.id}, [](Graph& g, std::size_t self) {
    const Tensor& y = g.value_of(self);
    const Tensor& dy = g.grad_of(self);
    if (Tensor* d = g.grad_buffer(g.parent(self, 0))) {
      Eigen::VectorXd dot = dy.cwiseProduct(y).rowwise().sum();
      *d += (y.array() * (dy.colwise() - dot).array()).matrix();
    }
  }, "softmax");
}

Var log_sum_exp(Var a) {
  const Tensor& x = a.value();
  Tensor y(x.rows(), 1);
  std::vector<double> e(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).maxCoeff();
    for (Eigen::Index j = 0; j < x.cols(); ++j) e[static_cast<std::size_t>(j)] = std::exp(x(i, j) - m);
    y(i, 0) = m + std::log(canonical_sum(e));
  }
  return a.graph->emit(std::move(y), {a.id}, [](Graph& g, std::size_t self) {
    const std::size_t ia = g.parent(self, 0);
    if (Tensor* d = g.grad_buffer(ia)) {
      const Tensor& x = g.value_of(ia);
      const Tensor& y = g.value_of(self);
      const Tensor& dy = g.grad_of(self);
      // d lse / dx_ij = softmax_ij
      *d += ((x.colwise() - y.col(0)).array().exp().colwise() * dy.col(0).array()).matrix();
    }
  }, "log_sum_exp");
}

Var concat(const std::vector<Var>& parts, int axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no operands");
  if (axis != 0 && axis != 1) throw std::invalid_argument("concat: axis must be 0 or 1");
  Graph* g = parts.front().graph;
  Eigen::Index rows = 0, cols = 0;
  for (const Var& p : parts) {
    check_same_graph(parts.front(), p);
    const Tensor& v = p.value();
    if (axis == 1) {
      if (rows == 0 && cols == 0) rows = v.rows();
      if (v.rows() != rows) shape_error("concat", parts.front().value(), v);
      cols += v.cols();
    } else {
      if (rows == 0 && cols == 0) cols = v.cols();
      if (v.cols() != cols) shape_error("concat", parts.front().value(), v);
      rows += v.rows();
    }
  }
  Tensor out(rows, cols);
  std::vector<std::size_t> ids;
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    if (axis == 1) {
      out.middleCols(off, v.cols()) = v;
      off += v.cols();
    } else {
      out.middleRows(off, v.rows()) = v;
      off += v.rows();
    }
    ids.push_back(p.id);
  }
  return g->emit(std::move(out), std::move(ids), [axis](Graph& g, std::size_t self) {
    const Tensor& d = g.grad_of(self);
    Eigen::Index off = 0;
    for (std::size_t k = 0;; ++k) {
      if (off >= (axis == 1 ? d.cols() : d.rows())) break;
      const std::size_t ip = g.parent(self, k);
      const Tensor& pv = g.value_of(ip);
      if (Tensor* dp = g.grad_buffer(ip)) {
        if (axis == 1) *dp += d.middleCols(off, pv.cols());
        else *dp += d.middleRows(off, pv.rows());
      }
      off += axis == 1 ? pv.cols() : pv.rows();
    }
  }, "concat");
}

Var slice(Var a, Eigen::Index r, Eigen::Index nr, Eigen::Index c, Eigen::Index nc) {
  const Tensor& v = a.value();
  if (r < 0 || c < 0 || nr <= 0 || nc <= 0 || r + nr > v.rows() || c + nc > v.cols()) {
    throw std::invalid_argument("slice: block [" + std::to_string(r) + "+" + std::to_string(nr) + ", " +
                                std::to_string(c) + "+" + std::to_string(nc) + "] outside " +
                                std::to_string(v.rows()) + "x" + std::to_string(v.cols()));
  }
  return a.graph->emit(v.block(r, c, nr, nc), {a.id}, [r, c, nr, nc](Graph& g, std::size_t self) {
    if (Tensor* d = g.grad_buffer(g.parent(self, 0))) d->block(r, c, nr, nc) += g.grad_of(self);
  }, "slice");
}

Var row(Var a, Eigen::Index r) { return slice(a, r, 1, 0, a.cols()); }

Var transpose(Var a) {
  return a.graph->emit(a.value().transpose(), {a.id}, [](Graph& g, std::size_t self) {
    if (Tensor* d = g.grad_buffer(g.parent(self, 0))) *d += g.grad_of(self).transpose();
  }, "transpose");
}

Var sum(Var a) {
  return a.graph->emit(Tensor::Constant(1, 1, a.value().sum()), {a.id}, [](Graph& g, std::size_t self) {
    if (Tensor* d = g.grad_buffer(g.parent(self, 0))) d->array() += g.grad_of(self)(0, 0);
  }, "sum");
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  return a.graph->emit(Tensor::Constant(1, 1, a.value().sum() / n), {a.id}, [n](Graph& g, std::size_t self) {
    if (Tensor* d = g.grad_buffer(g.parent(self, 0))) d->array() += g.grad_of(self)(0, 0) / n;
  }, "mean");
}

Var dropout(Var a, const Tensor& mask) {
  if (mask.rows() != a.rows() || mask.cols() != a.cols()) shape_error("dropout", a.value(), mask);
  return mul(a, a.graph->constant(mask));
}

GradCheckResult gradient_check(const std::function<Var(Graph&)>& loss, const std::vector<Parameter*>& params,
                               double eps, std::size_t max_coords_per_param, std::uint64_t seed) {
  for (Parameter* p : params) p->zero_grad();
  {
    Graph g;
    Var l = loss(g);
    if (!std::isfinite(l.scalar())) throw NumericalError("gradient_check: non-finite loss");
    g.backward(l);
  }
  std::mt19937_64 rng(seed);
  GradCheckResult result;
  auto eval = [&] {
    Graph g;
    double v = loss(g).scalar();
    if (!std::isfinite(v)) throw NumericalError("gradient_check: non-finite loss");
    return v;
  };
  for (Parameter* p : params) {
    if (!p->requires_grad) continue;
    const Tensor analytic = p->grad;
    std::vector<Eigen::Index> coords(static_cast<std::size_t>(p->value.size()));
    std::iota(coords.begin(), coords.end(), Eigen::Index{0});
    if (max_coords_per_param && coords.size() > max_coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(max_coords_per_param);
      std::sort(coords.begin(), coords.end());
    }
    for (Eigen::Index idx : coords) {
      double& theta = p->value.data()[idx];
      const double saved = theta;
      theta = saved + eps;
      const double up = eval();
      theta = saved - eps;
      const double down = eval();
      theta = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic.data()[idx];
      const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      ++result.coordinates;
      if (rel > result.max_relative_error || result.worst.empty()) {
        result.max_relative_error = rel;
        char buf[160];
        std::snprintf(buf, sizeof buf, "[%ld,%ld] analytic=%.10g numeric=%.10g",
                      static_cast<long>(idx / p->value.cols()), static_cast<long>(idx % p->value.cols()), a,
                      numeric);
        result.worst = p->name + buf;
      }
    }
  }
  return result;
}

double grad_norm(const std::vector<Parameter*>& params) {
  double s = 0.0;
  for (const Parameter* p : params) {
    if (p->requires_grad && p->grad.size()) s += p->grad.squaredNorm();
  }
  return std::sqrt(s);
}

}  // namespace xner::ad

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "xner/embeddings.hpp"

/// Reverse-mode automatic differentiation over dense row-major double matrices.
///
/// A Graph is a tape: nodes are appended in creation order, which is a valid
/// topological order, and backward() walks it once in reverse. Tensors are
/// rank 2; vectors are 1 x n rows. A Graph is single-threaded; independent
/// graphs share nothing and may run concurrently.
namespace xner::ad {

using Tensor = Matrix;

/// Trainable tensor that outlives graphs. Gradients from every graph that
/// binds it accumulate into `grad` until zero_grad().
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Tensor value, bool requires_grad = true);

  std::string name;
  Tensor value;
  Tensor grad;
  bool requires_grad = true;

  void zero_grad();
  std::size_t size() const { return static_cast<std::size_t>(value.size()); }
};

class Graph;

/// Handle to a node of a Graph.
struct Var {
  Graph* graph = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
};

class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::size_t self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Leaf without gradient.
  Var constant(Tensor value);
  /// Leaf that owns its gradient (readable through grad()).
  Var variable(Tensor value);
  /// Leaf bound to a parameter; gradient flows into p.grad iff p.requires_grad.
  Var param(Parameter& p);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  /// nullptr when the node received no gradient or does not require one.
  const Tensor* grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Throws std::invalid_argument unless `loss` is 1 x 1.
  void backward(Var loss);

  // Op implementation interface.
  Var emit(Tensor value, std::vector<std::size_t> parents, BackwardFn fn, const char* op);
  const Tensor& value_of(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad_of(std::size_t id) const { return nodes_[id].grad; }
  std::size_t parent(std::size_t id, std::size_t k) const { return nodes_[id].parents[k]; }
  /// Zero-initialized gradient buffer of node `id`, or nullptr if it needs none.
  Tensor* grad_buffer(std::size_t id);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

// Primitive set. Shape mismatches throw std::invalid_argument naming the op.

Var matmul(Var a, Var b);
/// Same as matmul, but each output entry sums its products in a canonical
/// (sorted) order, so permuting the rows of `b` together with the columns of
/// `a` permutes nothing but the summation terms and leaves results bitwise equal.
Var matmul_order_invariant(Var a, Var b);
/// Elementwise a + b; either operand may be a 1 x cols row broadcast over rows.
Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double c);
Var tanh(Var a);
Var sigmoid(Var a);
/// Row-wise softmax; the normalizer is an order-invariant sum.
Var softmax(Var a);
/// Row-wise log-sum-exp (max-shifted), rows x 1.
Var log_sum_exp(Var a);
/// axis 1 joins columns (the last dim), axis 0 stacks rows.
Var concat(const std::vector<Var>& parts, int axis = 1);
Var slice(Var a, Eigen::Index row, Eigen::Index nrows, Eigen::Index col, Eigen::Index ncols);
Var row(Var a, Eigen::Index r);
Var transpose(Var a);
Var sum(Var a);
Var mean(Var a);
/// Multiplies by an externally sampled mask (already scaled by 1/(1-p)).
Var dropout(Var a, const Tensor& mask);

/// Inverted-dropout mask: each entry 0 with probability p, else 1/(1-p).
template <class Rng>
Tensor dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng);

/// Order-invariant sum: sorts a copy, then adds smallest to largest.
double canonical_sum(std::vector<double> terms);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst;  // "<param>[i,j] analytic=<a> numeric=<n>"
};

/// Central differences (f(t+eps) - f(t-eps)) / 2eps against backward(),
/// scored by |a - n| / max(1e-8, |a| + |n|). Checks every coordinate when
/// `max_coords_per_param` is 0, otherwise a seeded sample of that many per
/// parameter. `loss` must be deterministic. Throws NumericalError on a
/// non-finite loss.
GradCheckResult gradient_check(const std::function<Var(Graph&)>& loss, const std::vector<Parameter*>& params,
                               double eps = 1e-5, std::size_t max_coords_per_param = 0, std::uint64_t seed = 0);

/// Global L2 norm of all gradients.
double grad_norm(const std::vector<Parameter*>& params);

template <class Rng>
Tensor dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
  Tensor m(rows, cols);
  if (p <= 0.0) {
    m.setOnes();
    return m;
  }
  std::bernoulli_distribution keep(1.0 - p);
  const double s = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = keep(rng) ? s : 0.0;
  return m;
}

}  // namespace xner::ad

#ifndef HEADLINER_AUTODIFF_HPP_
#define HEADLINER_AUTODIFF_HPP_

#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "headliner/parameters.hpp"
#include "headliner/tensor.hpp"

namespace headliner {

class Graph;

// Handle to a node in a Graph. Cheap to copy; valid while the graph lives.
struct Expr {
  Graph* graph = nullptr;
  std::size_t id = 0;

  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  double scalar() const { return value()[0]; }
};

// Tape for one forward pass. Nodes are recorded in topological order, so the
// backward sweep walks ids downward from the loss.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::size_t self)>;

  explicit Graph(bool training = false, std::uint64_t seed = 0)
      : training_(training), rng_(seed) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Expr constant(Matrix value);
  // Leaf that reads the parameter in place; its gradient is added to p.grad.
  Expr param(Parameter& p);
  // Row gather from an embedding table; gradient is scattered into table.grad.
  Expr lookup(Parameter& table, std::span<const int> ids);
  Expr record(Matrix value, BackwardFn backward);

  const Matrix& value(std::size_t id) const;
  // Gradient buffer of a node, zero-initialized on first access.
  Matrix& grad(std::size_t id);

  // Seeds d(loss)/d(loss) = 1 and propagates. A graph can be swept once.
  void backward(Expr loss);

  bool training() const { return training_; }
  std::mt19937_64& rng() { return rng_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;
    Matrix grad;
    bool grad_live = false;
    BackwardFn backward;
  };

  Expr push(Node node);

  std::deque<Node> nodes_;
  bool training_;
  bool swept_ = false;
  std::mt19937_64 rng_;
};

Expr matmul(Expr a, Expr b);
// a * b^T
Expr matmul_nt(Expr a, Expr b);
// Elementwise sum; b may also be a 1 x cols row broadcast over a's rows.
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr scale(Expr a, double k);
Expr tanh(Expr a);
Expr sigmoid(Expr a);
Expr concat_cols(std::span<const Expr> parts);
Expr concat_rows(std::span<const Expr> parts);
Expr slice_cols(Expr a, std::size_t begin, std::size_t end);
Expr slice_rows(Expr a, std::size_t begin, std::size_t end);
Expr sum(Expr a);
// Inverted dropout: identity outside training mode.
Expr dropout(Expr a, double p);
// Mean binary cross-entropy of sigmoid(logits) (n x 1) against 0/1 targets.
Expr bce_with_logits(Expr logits, std::span<const double> targets);
// Summed negative log-softmax of each row's target column.
Expr softmax_cross_entropy(Expr logits, std::span<const int> targets);

inline Expr operator+(Expr a, Expr b) { return add(a, b); }
inline Expr operator-(Expr a, Expr b) { return sub(a, b); }

}  // namespace headliner

#endif  // HEADLINER_AUTODIFF_HPP_

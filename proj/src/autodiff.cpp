#include "headliner/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace headliner {

const Matrix& Expr::value() const { return graph->value(id); }

Expr Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Expr{this, nodes_.size() - 1};
}

Expr Graph::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Expr Graph::param(Parameter& p) {
  Node n;
  n.external = &p.value;
  if (p.trainable) {
    Parameter* target = &p;
    n.backward = [target](Graph& g, std::size_t self) { target->grad += g.grad(self); };
  }
  return push(std::move(n));
}

Expr Graph::lookup(Parameter& table, std::span<const int> ids) {
  const std::size_t dim = table.value.cols();
  Matrix out(ids.size(), dim);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const auto id = static_cast<std::size_t>(ids[r]);
    if (id >= table.value.rows()) throw std::out_of_range("lookup: id out of range in " + table.name);
    std::copy_n(table.value.row(id).data(), dim, out.row(r).data());
  }
  Node n;
  n.value = std::move(out);
  if (table.trainable) {
    Parameter* target = &table;
    std::vector<int> rows(ids.begin(), ids.end());
    n.backward = [target, rows = std::move(rows)](Graph& g, std::size_t self) {
      const Matrix& gr = g.grad(self);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        auto dst = target->grad.row(static_cast<std::size_t>(rows[r]));
        auto src = gr.row(r);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
      }
    };
  }
  return push(std::move(n));
}

Expr Graph::record(Matrix value, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  n.backward = std::move(backward);
  return push(std::move(n));
}

const Matrix& Graph::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.value;
}

Matrix& Graph::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.grad_live) {
    const Matrix& v = value(id);
    n.grad = Matrix(v.rows(), v.cols());
    n.grad_live = true;
  }
  return n.grad;
}

void Graph::backward(Expr loss) {
  if (swept_) throw std::logic_error("backward called twice on the same graph");
  if (loss.graph != this) throw std::invalid_argument("backward: expression from another graph");
  if (value(loss.id).size() != 1) throw std::invalid_argument("backward: loss must be a scalar");
  swept_ = true;
  grad(loss.id)[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad_live && n.backward) n.backward(*this, i);
  }
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Expr matmul(Expr a, Expr b) {
  Graph& g = *a.graph;
  Matrix out = headliner::matmul(a.value(), b.value());
  return g.record(std::move(out), [a, b](Graph& g, std::size_t self) {
    const Matrix& d = g.grad(self);
    gemm_nt_accumulate(d, b.value(), g.grad(a.id));
    gemm_tn_accumulate(a.value(), d, g.grad(b.id));
  });
}

Expr matmul_nt(Expr a, Expr b) {
  Graph& g = *a.graph;
  Matrix out(a.rows(), b.rows());
  gemm_nt_accumulate(a.value(), b.value(), out);
  return g.record(std::move(out), [a, b](Graph& g, std::size_t self) {
    const Matrix& d = g.grad(self);
    gemm_accumulate(d, b.value(), g.grad(a.id));
    gemm_tn_accumulate(d, a.value(), g.grad(b.id));
  });
}

Expr add(Expr a, Expr b) {
  Graph& g = *a.graph;
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  const bool broadcast = !av.same_shape(bv);
  require(!broadcast || (bv.rows() == 1 && bv.cols() == av.cols()), "add: shape mismatch");
  Matrix out = av;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    auto src = broadcast ? bv.row(0) : bv.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += src[c];
  }
  return g.record(std::move(out), [a, b, broadcast](Graph& g, std::size_t self) {
    const Matrix& d = g.grad(self);
    g.grad(a.id) += d;
    Matrix& gb = g.grad(b.id);
    if (!broadcast) {
      gb += d;
    } else {
      for (std::size_t r = 0; r < d.rows(); ++r) {
        auto src = d.row(r);
        for (std::size_t c = 0; c < src.size(); ++c) gb[c] += src[c];
      }
    }
  });
}

Expr sub(Expr a, Expr b) {
  Graph& g = *a.graph;
  require(a.value().same_shape(b.value()), "sub: shape mismatch");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return g.record(std::move(out), [a, b](Graph& g, std::size_t self) {
    const Matrix& d = g.grad(self);
    g.grad(a.id) += d;
    Matrix& gb = g.grad(b.id);
    for (std::size_t i = 0; i < d.size(); ++i) gb[i] -= d[i];
  });
}

Expr mul(Expr a, Expr b) {
  Graph& g = *a.graph;
  require(a.value().same_shape(b.value()), "mul: shape mismatch");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return g.record(std::move(out), [a, b](Graph& g, std::size_t self) {
    const Matrix& d = g.grad(self);
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    Matrix& ga = g.grad(a.id);
    for (std::size_t i = 0; i < d.size(); ++i) ga[i] += d[i] * bv[i];
    Matrix& gb = g.grad(b.id);
    for (std::size_t i = 0; i < d.size(); ++i) gb[i] += d[i] * av[i];
  });
}

Expr scale(Expr a, double k) {
  Graph& g = *a.graph;
  Matrix out = a.value();
  out *= k;
  return g.record(std::move(out), [a, k](Graph& g, std::size_t self) {
    const Matrix& d = g.grad(self);
    Matrix& ga = g.grad(a.id);
    for (std::size_t i = 0; i < d.size(); ++i) ga[i] += k * d[i];
  });
}

Expr tanh(Expr a) {
  Graph& g = *a.graph;
  Matrix out = a.value();
  for (double& v : out.values()) v = std::tanh(v);
  return g.record(std::move(out), [a](Graph& g, std::size_t self) {
    const Matrix& d = g.grad(self);
    const Matrix& y = g.value(self);
    Matrix& ga = g.grad(a.id);
    for (std::size_t i = 0; i < d.size(); ++i) ga[i] += d[i] * (1.0 - y[i] * y[i]);
  });
}

Expr sigmoid(Expr a) {
  Graph& g = *a.graph;
  Matrix out = a.value();
  for (double& v : out.values()) v = 1.0 / (1.0 + std::exp(-v));
  return g.record(std::move(out), [a](Graph& g, std::size_t self) {
    const Matrix& d = g.grad(self);
    const Matrix& y = g.value(self);
    Matrix& ga = g.grad(a.id);
    for (std::size_t i = 0; i < d.size(); ++i) ga[i] += d[i] * y[i] * (1.0 - y[i]);
  });
}

Expr concat_cols(std::span<const Expr> parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  Graph& g = *parts[0].graph;
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  for (const Expr& p : parts) {
    require(p.rows() == rows, "concat_cols: row mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const Expr& p : parts) {
    const Matrix& v = p.value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(v.row(r).data(), v.cols(), out.row(r).data() + offset);
    }
    offset += v.cols();
  }
  std::vector<Expr> inputs(parts.begin(), parts.end());
  return g.record(std::move(out), [inputs = std::move(inputs)](Graph& g, std::size_t self) {
    const Matrix& d = g.grad(self);
    std::size_t offset = 0;
    for (const Expr& p : inputs) {
      Matrix& gp = g.grad(p.id);
      for (std::size_t r = 0; r < gp.rows(); ++r) {
        auto dst = gp.row(r);
        const double* src = d.row(r).data() + offset;
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
      }
      offset += gp.cols();
    }
  });
}

Expr concat_rows(std::span<const Expr> parts) {
  require(!parts.empty(), "concat_rows: no inputs");
  Graph& g = *parts[0].graph;
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  for (const Expr& p : parts) {
    require(p.cols() == cols, "concat_rows: column mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const Expr& p : parts) {
    const Matrix& v = p.value();
    std::copy_n(v.data(), v.size(), out.data() + offset * cols);
    offset += v.rows();
  }
  std::vector<Expr> inputs(parts.begin(), parts.end());
  return g.record(std::move(out), [inputs = std::move(inputs)](Graph& g, std::size_t self) {
    const Matrix& d = g.grad(self);
    std::size_t offset = 0;
    for (const Expr& p : inputs) {
      Matrix& gp = g.grad(p.id);
      const double* src = d.data() + offset * d.cols();
      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += src[i];
      offset += gp.rows();
    }
  });
}

Expr slice_cols(Expr a, std::size_t begin, std::size_t end) {
  Graph& g = *a.graph;
  const Matrix& v = a.value();
  require(begin <= end && end <= v.cols(), "slice_cols: bad range");
  Matrix out(v.rows(), end - begin);
  for (std::size_t r = 0; r < v.rows(); ++r) {
    std::copy_n(v.row(r).data() + begin, end - begin, out.row(r).data());
  }
  return g.record(std::move(out), [a, begin](Graph& g, std::size_t self) {
    const Matrix& d = g.grad(self);
    Matrix& ga = g.grad(a.id);
    for (std::size_t r = 0; r < d.rows(); ++r) {
      double* dst = ga.row(r).data() + begin;
      auto src = d.row(r);
      for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
    }
  });
}

Expr slice_rows(Expr a, std::size_t begin, std::size_t end) {
  Graph& g = *a.graph;
  const Matrix& v = a.value();
  require(begin <= end && end <= v.rows(), "slice_rows: bad range");
  Matrix out(end - begin, v.cols());
  std::copy_n(v.data() + begin * v.cols(), out.size(), out.data());
  return g.record(std::move(out), [a, begin](Graph& g, std::size_t self) {
    const Matrix& d = g.grad(self);
    Matrix& ga = g.grad(a.id);
    double* dst = ga.data() + begin * ga.cols();
    for (std::size_t i = 0; i < d.size(); ++i) dst[i] += d[i];
  });
}

Expr sum(Expr a) {
  Graph& g = *a.graph;
  double total = 0.0;
  for (double v : a.value().values()) total += v;
  return g.record(Matrix(1, 1, total), [a](Graph& g, std::size_t self) {
    const double d = g.grad(self)[0];
    Matrix& ga = g.grad(a.id);
    for (double& v : ga.values()) v += d;
  });
}

Expr dropout(Expr a, double p) {
  Graph& g = *a.graph;
  if (!g.training() || p <= 0.0) return a;
  require(p < 1.0, "dropout: p must be < 1");
  const Matrix& v = a.value();
  Matrix mask(v.rows(), v.cols());
  std::bernoulli_distribution keep(1.0 - p);
  const double survivor = 1.0 / (1.0 - p);
  for (double& m : mask.values()) m = keep(g.rng()) ? survivor : 0.0;
  Matrix out = v;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return g.record(std::move(out), [a, mask = std::move(mask)](Graph& g, std::size_t self) {
    const Matrix& d = g.grad(self);
    Matrix& ga = g.grad(a.id);
    for (std::size_t i = 0; i < d.size(); ++i) ga[i] += d[i] * mask[i];
  });
}

Expr bce_with_logits(Expr logits, std::span<const double> targets) {
  Graph& g = *logits.graph;
  const Matrix& z = logits.value();
  require(z.size() == targets.size() && !targets.empty(), "bce_with_logits: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    // log(1 + exp(z)) - t z, written to avoid overflow.
    const double zi = z[i];
    total += std::max(zi, 0.0) - zi * targets[i] + std::log1p(std::exp(-std::abs(zi)));
  }
  const double n = static_cast<double>(z.size());
  std::vector<double> t(targets.begin(), targets.end());
  return g.record(Matrix(1, 1, total / n), [logits, t = std::move(t), n](Graph& g, std::size_t self) {
    const double d = g.grad(self)[0] / n;
    const Matrix& z = logits.value();
    Matrix& gz = g.grad(logits.id);
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double p = 1.0 / (1.0 + std::exp(-z[i]));
      gz[i] += d * (p - t[i]);
    }
  });
}

Expr softmax_cross_entropy(Expr logits, std::span<const int> targets) {
  Graph& g = *logits.graph;
  const Matrix& z = logits.value();
  require(z.rows() == targets.size(), "softmax_cross_entropy: size mismatch");
  Matrix probs(z.rows(), z.cols());
  double total = 0.0;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const double lse = log_sum_exp(z.row(r));
    auto pr = probs.row(r);
    auto zr = z.row(r);
    for (std::size_t c = 0; c < pr.size(); ++c) pr[c] = std::exp(zr[c] - lse);
    const auto t = static_cast<std::size_t>(targets[r]);
    require(t < z.cols(), "softmax_cross_entropy: target out of range");
    total += lse - zr[t];
  }
  std::vector<int> t(targets.begin(), targets.end());
  return g.record(Matrix(1, 1, total),
                  [logits, probs = std::move(probs), t = std::move(t)](Graph& g, std::size_t self) {
                    const double d = g.grad(self)[0];
                    Matrix& gz = g.grad(logits.id);
                    for (std::size_t r = 0; r < probs.rows(); ++r) {
                      auto dst = gz.row(r);
                      auto pr = probs.row(r);
                      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += d * pr[c];
                      dst[static_cast<std::size_t>(t[r])] -= d;
                    }
                  });
}

}  // namespace headliner

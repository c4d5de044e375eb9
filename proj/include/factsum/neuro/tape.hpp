#pragma once

// Reverse-mode automatic differentiation over 2D tensors. A Tape owns the
// computation graph for one forward pass; operations append nodes and return
// Value handles. backward() walks the nodes in reverse creation order.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "factsum/neuro/tensor.hpp"

namespace factsum::neuro {

template <typename T>
class Tape;

template <typename T>
struct Value {
  Tape<T>* tape = nullptr;
  int idx = -1;

  const Tensor<T>& val() const { return tape->node(idx).val; }
  bool valid() const { return tape != nullptr && idx >= 0; }
};

template <typename T>
class Tape {
 public:
  struct Node {
    Tensor<T> val;
    std::function<void(Tape&, int)> back;  // null for leaves
    std::string param_name;                // nonempty when bound to a store parameter
  };

  bool training = false;
  Rng* rng = nullptr;  // dropout masks; required only in training mode

  Node& node(int i) { return nodes_[static_cast<std::size_t>(i)]; }
  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return nodes_.size(); }

  Value<T> leaf(Tensor<T> t) {
    nodes_.push_back(Node{std::move(t), nullptr, {}});
    return {this, static_cast<int>(nodes_.size() - 1)};
  }

  Value<T> leaf(std::size_t r, std::size_t c) { return leaf(Tensor<T>::zeros(r, c)); }

  // Gradient buffer of node i, allocated on first touch.
  Tensor<T>& grad_of(int i) {
    Node& n = node(i);
    n.val.ensure_grad();
    return n.val;
  }

  void add_grad(int i, const std::vector<T>& g) {
    Tensor<T>& t = grad_of(i);
    for (std::size_t k = 0; k < g.size(); ++k) t.grad[k] += g[k];
  }

  // Seeds d(loss)/d(loss) = 1 and propagates to every reachable node.
  void backward(Value<T> loss) {
    Node& ln = node(loss.idx);
    if (ln.val.size() != 1) fail(Errc::shape_mismatch, "backward: loss must be scalar");
    ln.val.ensure_grad();
    ln.val.grad[0] = T(1);
    for (int i = loss.idx; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      if (n.back && n.val.has_grad()) n.back(*this, i);
    }
  }

  Value<T> make(Tensor<T> value, std::function<void(Tape&, int)> back) {
    nodes_.push_back(Node{std::move(value), std::move(back), {}});
    return {this, static_cast<int>(nodes_.size() - 1)};
  }

 private:
  std::vector<Node> nodes_;
};

namespace ops {

template <typename T>
inline void check_same_shape(const Value<T>& a, const Value<T>& b, const char* who) {
  if (!a.val().same_shape(b.val()))
    fail(Errc::shape_mismatch, std::string(who) + ": " + shape_str(a.val()) + " vs " +
                                   shape_str(b.val()));
}

template <typename T>
Value<T> add(Value<T> a, Value<T> b) {
  check_same_shape(a, b, "add");
  Tensor<T> out = a.val();
  for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] += b.val().data[k];
  const int ai = a.idx, bi = b.idx;
  return a.tape->make(std::move(out), [ai, bi](Tape<T>& t, int self) {
    const auto& g = t.node(self).val.grad;
    t.add_grad(ai, g);
    t.add_grad(bi, g);
  });
}

template <typename T>
Value<T> sub(Value<T> a, Value<T> b) {
  check_same_shape(a, b, "sub");
  Tensor<T> out = a.val();
  for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] -= b.val().data[k];
  const int ai = a.idx, bi = b.idx;
  return a.tape->make(std::move(out), [ai, bi](Tape<T>& t, int self) {
    const auto& g = t.node(self).val.grad;
    t.add_grad(ai, g);
    Tensor<T>& tb = t.grad_of(bi);
    for (std::size_t k = 0; k < g.size(); ++k) tb.grad[k] -= g[k];
  });
}

template <typename T>
Value<T> mul(Value<T> a, Value<T> b) {
  check_same_shape(a, b, "mul");
  Tensor<T> out = a.val();
  for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] *= b.val().data[k];
  const int ai = a.idx, bi = b.idx;
  return a.tape->make(std::move(out), [ai, bi](Tape<T>& t, int self) {
    const auto& g = t.node(self).val.grad;
    const auto& av = t.node(ai).val.data;
    const auto& bv = t.node(bi).val.data;
    Tensor<T>& ta = t.grad_of(ai);
    Tensor<T>& tb = t.grad_of(bi);
    for (std::size_t k = 0; k < g.size(); ++k) {
      ta.grad[k] += g[k] * bv[k];
      tb.grad[k] += g[k] * av[k];
    }
  });
}

template <typename T>
Value<T> scale(Value<T> a, T c) {
  Tensor<T> out = a.val();
  for (auto& v : out.data) v *= c;
  const int ai = a.idx;
  return a.tape->make(std::move(out), [ai, c](Tape<T>& t, int self) {
    const auto& g = t.node(self).val.grad;
    Tensor<T>& ta = t.grad_of(ai);
    for (std::size_t k = 0; k < g.size(); ++k) ta.grad[k] += c * g[k];
  });
}

// x (m x n) + row vector b (1 x n), broadcast over rows.
template <typename T>
Value<T> add_rowvec(Value<T> x, Value<T> b) {
  if (b.val().rows() != 1 || b.val().cols() != x.val().cols())
    fail(Errc::shape_mismatch, "add_rowvec: " + shape_str(x.val()) + " vs " + shape_str(b.val()));
  Tensor<T> out = x.val();
  const std::size_t n = out.cols();
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) += b.val().data[j];
  const int xi = x.idx, bi = b.idx;
  return x.tape->make(std::move(out), [xi, bi](Tape<T>& t, int self) {
    const Tensor<T>& gv = t.node(self).val;
    t.add_grad(xi, gv.grad);
    Tensor<T>& tb = t.grad_of(bi);
    const std::size_t n = gv.cols();
    for (std::size_t i = 0; i < gv.rows(); ++i)
      for (std::size_t j = 0; j < n; ++j) tb.grad[j] += gv.grad[i * n + j];
  });
}

template <typename T>
Value<T> matmul(Value<T> a, Value<T> b) {
  Tensor<T> out;
  kernel::matmul(a.val(), false, b.val(), false, out);
  const int ai = a.idx, bi = b.idx;
  return a.tape->make(std::move(out), [ai, bi](Tape<T>& t, int self) {
    Tensor<T> gt;
    gt.shape = t.node(self).val.shape;
    gt.data = t.node(self).val.grad;  // treat the gradient as a plain matrix
    Tensor<T>& ga = t.grad_of(ai);
    Tensor<T>& gb = t.grad_of(bi);
    kernel::matmul(gt, false, t.node(bi).val, true, ga, true);
    kernel::matmul(t.node(ai).val, true, gt, false, gb, true);
  });
}

template <typename T>
Value<T> transpose(Value<T> a) {
  const Tensor<T>& av = a.val();
  Tensor<T> out(av.cols(), av.rows());
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(j, i) = av(i, j);
  const int ai = a.idx;
  return a.tape->make(std::move(out), [ai](Tape<T>& t, int self) {
    const Tensor<T>& gv = t.node(self).val;
    Tensor<T>& ga = t.grad_of(ai);
    const std::size_t r = gv.rows(), c = gv.cols();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga.grad[j * r + i] += gv.grad[i * c + j];
  });
}

// Embedding lookup: selects rows of a (param) matrix.
template <typename T>
Value<T> rows_gather(Value<T> table, std::vector<int> ids) {
  const Tensor<T>& tv = table.val();
  Tensor<T> out(ids.size(), tv.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto r = static_cast<std::size_t>(ids[i]);
    if (r >= tv.rows()) fail(Errc::id_out_of_range, "rows_gather: row out of range");
    std::copy_n(tv.data.begin() + static_cast<std::ptrdiff_t>(r * tv.cols()), tv.cols(),
                out.data.begin() + static_cast<std::ptrdiff_t>(i * tv.cols()));
  }
  const int ti = table.idx;
  return table.tape->make(std::move(out), [ti, ids = std::move(ids)](Tape<T>& t, int self) {
    const Tensor<T>& gv = t.node(self).val;
    Tensor<T>& gt = t.grad_of(ti);
    const std::size_t c = gv.cols();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto r = static_cast<std::size_t>(ids[i]);
      for (std::size_t j = 0; j < c; ++j) gt.grad[r * c + j] += gv.grad[i * c + j];
    }
  });
}

// Stacks 1xC rows into an NxC matrix.
template <typename T>
Value<T> stack_rows(Tape<T>& tape, const std::vector<Value<T>>& rows) {
  if (rows.empty()) fail(Errc::empty_sequence, "stack_rows: no rows");
  const std::size_t c = rows[0].val().cols();
  Tensor<T> out(rows.size(), c);
  std::vector<int> idxs;
  idxs.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].val().rows() != 1 || rows[i].val().cols() != c)
      fail(Errc::shape_mismatch, "stack_rows: ragged rows");
    std::copy_n(rows[i].val().data.begin(), c,
                out.data.begin() + static_cast<std::ptrdiff_t>(i * c));
    idxs.push_back(rows[i].idx);
  }
  return tape.make(std::move(out), [idxs = std::move(idxs)](Tape<T>& t, int self) {
    const Tensor<T>& gv = t.node(self).val;
    const std::size_t c = gv.cols();
    for (std::size_t i = 0; i < idxs.size(); ++i) {
      Tensor<T>& gr = t.grad_of(idxs[i]);
      for (std::size_t j = 0; j < c; ++j) gr.grad[j] += gv.grad[i * c + j];
    }
  });
}

template <typename T>
Value<T> slice_rows(Value<T> a, std::size_t from, std::size_t to) {
  const Tensor<T>& av = a.val();
  if (to > av.rows() || from >= to) fail(Errc::shape_mismatch, "slice_rows: bad range");
  Tensor<T> out(to - from, av.cols());
  std::copy_n(av.data.begin() + static_cast<std::ptrdiff_t>(from * av.cols()),
              (to - from) * av.cols(), out.data.begin());
  const int ai = a.idx;
  return a.tape->make(std::move(out), [ai, from](Tape<T>& t, int self) {
    const Tensor<T>& gv = t.node(self).val;
    Tensor<T>& ga = t.grad_of(ai);
    const std::size_t c = gv.cols();
    for (std::size_t i = 0; i < gv.rows(); ++i)
      for (std::size_t j = 0; j < c; ++j) ga.grad[(from + i) * c + j] += gv.grad[i * c + j];
  });
}

template <typename T>
Value<T> slice_cols(Value<T> a, std::size_t from, std::size_t to) {
  const Tensor<T>& av = a.val();
  if (to > av.cols() || from >= to) fail(Errc::shape_mismatch, "slice_cols: bad range");
  Tensor<T> out(av.rows(), to - from);
  for (std::size_t i = 0; i < av.rows(); ++i)
    std::copy_n(av.data.begin() + static_cast<std::ptrdiff_t>(i * av.cols() + from), to - from,
                out.data.begin() + static_cast<std::ptrdiff_t>(i * (to - from)));
  const int ai = a.idx;
  return a.tape->make(std::move(out), [ai, from](Tape<T>& t, int self) {
    const Tensor<T>& gv = t.node(self).val;
    Tensor<T>& ga = t.grad_of(ai);
    const std::size_t c = gv.cols(), ac = t.node(ai).val.cols();
    for (std::size_t i = 0; i < gv.rows(); ++i)
      for (std::size_t j = 0; j < c; ++j) ga.grad[i * ac + from + j] += gv.grad[i * c + j];
  });
}

template <typename T>
Value<T> concat_cols(Value<T> a, Value<T> b) {
  const Tensor<T>& av = a.val();
  const Tensor<T>& bv = b.val();
  if (av.rows() != bv.rows()) fail(Errc::shape_mismatch, "concat_cols: row mismatch");
  Tensor<T> out(av.rows(), av.cols() + bv.cols());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    std::copy_n(av.data.begin() + static_cast<std::ptrdiff_t>(i * av.cols()), av.cols(),
                out.data.begin() + static_cast<std::ptrdiff_t>(i * out.cols()));
    std::copy_n(bv.data.begin() + static_cast<std::ptrdiff_t>(i * bv.cols()), bv.cols(),
                out.data.begin() + static_cast<std::ptrdiff_t>(i * out.cols() + av.cols()));
  }
  const int ai = a.idx, bi = b.idx;
  const std::size_t ac = av.cols(), bc = bv.cols();
  return a.tape->make(std::move(out), [ai, bi, ac, bc](Tape<T>& t, int self) {
    const Tensor<T>& gv = t.node(self).val;
    Tensor<T>& ga = t.grad_of(ai);
    Tensor<T>& gb = t.grad_of(bi);
    for (std::size_t i = 0; i < gv.rows(); ++i) {
      for (std::size_t j = 0; j < ac; ++j) ga.grad[i * ac + j] += gv.grad[i * (ac + bc) + j];
      for (std::size_t j = 0; j < bc; ++j)
        gb.grad[i * bc + j] += gv.grad[i * (ac + bc) + ac + j];
    }
  });
}

// Elementwise activations share one implementation; dval receives (x, y).
template <typename T, typename F, typename DF>
Value<T> unary(Value<T> a, F&& f, DF&& df) {
  Tensor<T> out = a.val();
  for (auto& v : out.data) v = f(v);
  const int ai = a.idx;
  return a.tape->make(std::move(out), [ai, df](Tape<T>& t, int self) {
    const Tensor<T>& yv = t.node(self).val;
    const auto& xv = t.node(ai).val.data;
    Tensor<T>& ga = t.grad_of(ai);
    for (std::size_t k = 0; k < yv.grad.size(); ++k)
      ga.grad[k] += yv.grad[k] * df(xv[k], yv.data[k]);
  });
}

template <typename T>
Value<T> relu(Value<T> a) {
  return unary(
      a, [](T x) { return x > T(0) ? x : T(0); },
      [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Value<T> leaky_relu(Value<T> a, T slope = T(0.2)) {
  return unary(
      a, [slope](T x) { return x > T(0) ? x : slope * x; },
      [slope](T x, T) { return x > T(0) ? T(1) : slope; });
}

template <typename T>
Value<T> elu(Value<T> a, T alpha = T(1)) {
  return unary(
      a, [alpha](T x) { return x > T(0) ? x : alpha * (std::exp(x) - T(1)); },
      [alpha](T x, T y) { return x > T(0) ? T(1) : y + alpha; });
}

template <typename T>
Value<T> tanh_v(Value<T> a) {
  return unary(
      a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Value<T> sigmoid_v(Value<T> a) {
  return unary(
      a, [](T x) { return T(1) / (T(1) + std::exp(-x)); },
      [](T, T y) { return y * (T(1) - y); });
}

// Row-wise softmax with max-subtraction; `mask`, when given, is added to the
// scores first (use -inf to block positions).
template <typename T>
Value<T> softmax_rows(Value<T> a, const Tensor<T>* mask = nullptr) {
  const Tensor<T>& av = a.val();
  if (mask && !mask->same_shape(av)) fail(Errc::shape_mismatch, "softmax_rows: mask shape");
  Tensor<T> out = av;
  const std::size_t r = out.rows(), c = out.cols();
  for (std::size_t i = 0; i < r; ++i) {
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t j = 0; j < c; ++j) {
      if (mask) out(i, j) += (*mask)(i, j);
      mx = std::max(mx, out(i, j));
    }
    T sum = T(0);
    for (std::size_t j = 0; j < c; ++j) {
      const T e = std::isinf(out(i, j)) && out(i, j) < T(0) ? T(0) : std::exp(out(i, j) - mx);
      out(i, j) = e;
      sum += e;
    }
    if (sum <= T(0)) fail(Errc::shape_mismatch, "softmax_rows: fully masked row");
    for (std::size_t j = 0; j < c; ++j) out(i, j) /= sum;
  }
  const int ai = a.idx;
  return a.tape->make(std::move(out), [ai](Tape<T>& t, int self) {
    const Tensor<T>& yv = t.node(self).val;
    Tensor<T>& ga = t.grad_of(ai);
    const std::size_t r = yv.rows(), c = yv.cols();
    for (std::size_t i = 0; i < r; ++i) {
      T dot = T(0);
      for (std::size_t j = 0; j < c; ++j) dot += yv.grad[i * c + j] * yv.data[i * c + j];
      for (std::size_t j = 0; j < c; ++j)
        ga.grad[i * c + j] += yv.data[i * c + j] * (yv.grad[i * c + j] - dot);
    }
  });
}

// Per-row layer normalization with learned gain and bias (both 1 x C).
template <typename T>
Value<T> layer_norm(Value<T> x, Value<T> gamma, Value<T> beta, T eps = T(1e-5)) {
  const Tensor<T>& xv = x.val();
  const std::size_t r = xv.rows(), c = xv.cols();
  if (gamma.val().cols() != c || beta.val().cols() != c)
    fail(Errc::shape_mismatch, "layer_norm: gain/bias width");
  Tensor<T> out(r, c);
  std::vector<T> inv_std(r), mean(r);
  for (std::size_t i = 0; i < r; ++i) {
    T mu = T(0);
    for (std::size_t j = 0; j < c; ++j) mu += xv(i, j);
    mu /= static_cast<T>(c);
    T var = T(0);
    for (std::size_t j = 0; j < c; ++j) {
      const T d = xv(i, j) - mu;
      var += d * d;
    }
    var /= static_cast<T>(c);
    const T is = T(1) / std::sqrt(var + eps);
    mean[i] = mu;
    inv_std[i] = is;
    for (std::size_t j = 0; j < c; ++j)
      out(i, j) = (xv(i, j) - mu) * is * gamma.val().data[j] + beta.val().data[j];
  }
  const int xi = x.idx, gi = gamma.idx, bi = beta.idx;
  return x.tape->make(std::move(out),
                      [xi, gi, bi, mean = std::move(mean), inv_std = std::move(inv_std)](
                          Tape<T>& t, int self) {
    const Tensor<T>& yv = t.node(self).val;
    const Tensor<T>& xv = t.node(xi).val;
    const auto& gam = t.node(gi).val.data;
    Tensor<T>& gx = t.grad_of(xi);
    Tensor<T>& gg = t.grad_of(gi);
    Tensor<T>& gb = t.grad_of(bi);
    const std::size_t r = yv.rows(), c = yv.cols();
    for (std::size_t i = 0; i < r; ++i) {
      T sum_dy = T(0), sum_dy_xhat = T(0);
      for (std::size_t j = 0; j < c; ++j) {
        const T xhat = (xv(i, j) - mean[i]) * inv_std[i];
        const T dy = yv.grad[i * c + j];
        gg.grad[j] += dy * xhat;
        gb.grad[j] += dy;
        const T dxhat = dy * gam[j];
        sum_dy += dxhat;
        sum_dy_xhat += dxhat * xhat;
      }
      for (std::size_t j = 0; j < c; ++j) {
        const T xhat = (xv(i, j) - mean[i]) * inv_std[i];
        const T dxhat = yv.grad[i * c + j] * gam[j];
        gx.grad[i * c + j] += inv_std[i] * (dxhat - (sum_dy + xhat * sum_dy_xhat) /
                                                        static_cast<T>(c));
      }
    }
  });
}

// Inverted dropout on the forward values; identity when not training.
template <typename T>
Value<T> dropout(Value<T> a, double rate) {
  if (!a.tape->training || rate <= 0.0) return a;
  if (!a.tape->rng) fail(Errc::config_invalid, "dropout: training tape has no rng");
  const T keep = static_cast<T>(1.0 - rate);
  Tensor<T> out = a.val();
  auto mask = std::make_shared<std::vector<T>>(out.data.size());
  for (std::size_t k = 0; k < out.data.size(); ++k) {
    const bool kept = a.tape->rng->uniform() >= rate;
    (*mask)[k] = kept ? T(1) / keep : T(0);
    out.data[k] *= (*mask)[k];
  }
  const int ai = a.idx;
  return a.tape->make(std::move(out), [ai, mask](Tape<T>& t, int self) {
    const auto& g = t.node(self).val.grad;
    Tensor<T>& ga = t.grad_of(ai);
    for (std::size_t k = 0; k < g.size(); ++k) ga.grad[k] += g[k] * (*mask)[k];
  });
}

// S_ij = l_i + r_j from two column vectors (n x 1).
template <typename T>
Value<T> broadcast_sum(Value<T> l, Value<T> r) {
  const std::size_t n = l.val().rows(), m = r.val().rows();
  if (l.val().cols() != 1 || r.val().cols() != 1)
    fail(Errc::shape_mismatch, "broadcast_sum: expects column vectors");
  Tensor<T> out(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out(i, j) = l.val().data[i] + r.val().data[j];
  const int li = l.idx, ri = r.idx;
  return l.tape->make(std::move(out), [li, ri](Tape<T>& t, int self) {
    const Tensor<T>& gv = t.node(self).val;
    Tensor<T>& gl = t.grad_of(li);
    Tensor<T>& gr = t.grad_of(ri);
    const std::size_t n = gv.rows(), m = gv.cols();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        gl.grad[i] += gv.grad[i * m + j];
        gr.grad[j] += gv.grad[i * m + j];
      }
  });
}

template <typename T>
Value<T> mean_all(Value<T> a) {
  const Tensor<T>& av = a.val();
  Tensor<T> out(1, 1);
  T s = T(0);
  for (const auto& v : av.data) s += v;
  out.data[0] = s / static_cast<T>(av.size());
  const int ai = a.idx;
  const T inv = T(1) / static_cast<T>(av.size());
  return a.tape->make(std::move(out), [ai, inv](Tape<T>& t, int self) {
    const T g = t.node(self).val.grad[0] * inv;
    Tensor<T>& ga = t.grad_of(ai);
    for (auto& v : ga.grad) v += g;
  });
}

template <typename T>
Value<T> sum_all(Value<T> a) {
  const Tensor<T>& av = a.val();
  Tensor<T> out(1, 1);
  T s = T(0);
  for (const auto& v : av.data) s += v;
  out.data[0] = s;
  const int ai = a.idx;
  return a.tape->make(std::move(out), [ai](Tape<T>& t, int self) {
    const T g = t.node(self).val.grad[0];
    Tensor<T>& ga = t.grad_of(ai);
    for (auto& v : ga.grad) v += g;
  });
}

// Mean negative log-likelihood of targets under row-wise softmax(logits).
// Positions whose target equals `pad_id` are excluded from the mean.
template <typename T>
Value<T> cross_entropy_logits(Value<T> logits, const std::vector<int>& targets,
                              int pad_id = -1) {
  const Tensor<T>& lv = logits.val();
  const std::size_t n = lv.rows(), v = lv.cols();
  if (targets.size() != n) fail(Errc::shape_mismatch, "cross_entropy_logits: target count");
  auto probs = std::make_shared<Tensor<T>>(n, v);
  std::size_t active = 0;
  T loss = T(0);
  for (std::size_t i = 0; i < n; ++i) {
    T mx = lv(i, 0);
    for (std::size_t j = 1; j < v; ++j) mx = std::max(mx, lv(i, j));
    T sum = T(0);
    for (std::size_t j = 0; j < v; ++j) {
      const T e = std::exp(lv(i, j) - mx);
      (*probs)(i, j) = e;
      sum += e;
    }
    const T log_sum = std::log(sum);
    for (std::size_t j = 0; j < v; ++j) (*probs)(i, j) /= sum;
    if (targets[i] == pad_id) continue;
    const auto ti = static_cast<std::size_t>(targets[i]);
    if (ti >= v) fail(Errc::id_out_of_range, "cross_entropy_logits: target id");
    loss += -(lv(i, ti) - mx - log_sum);
    ++active;
  }
  if (active == 0) fail(Errc::empty_sequence, "cross_entropy_logits: no active positions");
  Tensor<T> out(1, 1);
  out.data[0] = loss / static_cast<T>(active);
  const int li = logits.idx;
  return logits.tape->make(
      std::move(out), [li, probs, targets, pad_id, active](Tape<T>& t, int self) {
        const T g = t.node(self).val.grad[0] / static_cast<T>(active);
        Tensor<T>& gl = t.grad_of(li);
        const std::size_t n = probs->rows(), v = probs->cols();
        for (std::size_t i = 0; i < n; ++i) {
          if (targets[i] == pad_id) continue;
          for (std::size_t j = 0; j < v; ++j) gl.grad[i * v + j] += g * (*probs)(i, j);
          gl.grad[i * v + static_cast<std::size_t>(targets[i])] -= g;
        }
      });
}

// Mean negative log-probability over already-normalized distributions, the
// loss as written in the training objective. Rows must sum to 1 within 1e-6.
template <typename T>
Value<T> cross_entropy(Value<T> dists, const std::vector<int>& targets, int pad_id = -1) {
  const Tensor<T>& pv = dists.val();
  const std::size_t n = pv.rows(), v = pv.cols();
  if (targets.size() != n) fail(Errc::shape_mismatch, "cross_entropy: target count");
  std::size_t active = 0;
  T loss = T(0);
  for (std::size_t i = 0; i < n; ++i) {
    T sum = T(0);
    for (std::size_t j = 0; j < v; ++j) sum += pv(i, j);
    if (std::abs(static_cast<double>(sum) - 1.0) > 1e-6)
      fail(Errc::probability_not_normalized,
           "cross_entropy: row " + std::to_string(i) + " sums to " + std::to_string(sum));
    if (targets[i] == pad_id) continue;
    const auto ti = static_cast<std::size_t>(targets[i]);
    if (ti >= v) fail(Errc::id_out_of_range, "cross_entropy: target id");
    loss += -std::log(pv(i, ti));
    ++active;
  }
  if (active == 0) fail(Errc::empty_sequence, "cross_entropy: no active positions");
  Tensor<T> out(1, 1);
  out.data[0] = loss / static_cast<T>(active);
  const int pi = dists.idx;
  return dists.tape->make(std::move(out),
                          [pi, targets, pad_id, active](Tape<T>& t, int self) {
    const T g = t.node(self).val.grad[0] / static_cast<T>(active);
    const Tensor<T>& pv = t.node(pi).val;
    Tensor<T>& gp = t.grad_of(pi);
    const std::size_t v = pv.cols();
    for (std::size_t i = 0; i < pv.rows(); ++i) {
      if (targets[i] == pad_id) continue;
      const auto ti = static_cast<std::size_t>(targets[i]);
      gp.grad[i * v + ti] += -g / pv(i, ti);
    }
  });
}

// Numerically stable binary cross-entropy on a single logit.
template <typename T>
Value<T> bce_with_logit(Value<T> logit, T label) {
  const T z = logit.val().data[0];
  Tensor<T> out(1, 1);
  // log(1 + e^z) - y z, computed as softplus
  const T sp = z > T(0) ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  out.data[0] = sp - label * z;
  const int li = logit.idx;
  return logit.tape->make(std::move(out), [li, label](Tape<T>& t, int self) {
    const T g = t.node(self).val.grad[0];
    const T z = t.node(li).val.data[0];
    const T sig = T(1) / (T(1) + std::exp(-z));
    t.grad_of(li).grad[0] += g * (sig - label);
  });
}

}  // namespace ops

}  // namespace factsum::neuro

#pragma once

// Neural layers on top of the tape: linear, LSTM/BiLSTM, scaled multi-head
// attention, graph attention, and the single-head unscaled cross-attention
// over knowledge-graph node embeddings.

#include <optional>
#include <string>
#include <vector>

#include "factsum/neuro/store.hpp"

namespace factsum::neuro {

// ---------------------------------------------------------------------------
// Linear
// ---------------------------------------------------------------------------

template <typename T>
void declare_linear(ParameterStore<T>& store, Rng& rng, const std::string& prefix,
                    std::size_t in, std::size_t out, bool bias = true) {
  store.add_xavier(prefix + ".w", in, out, rng);
  if (bias) store.add_zeros(prefix + ".b", 1, out);
}

template <typename T>
Value<T> linear(Tape<T>& tape, ParameterStore<T>& store, const std::string& prefix,
                Value<T> x, bool bias = true) {
  Value<T> w = param(tape, store, prefix + ".w");
  if (x.val().cols() != w.val().rows())
    fail(Errc::shape_mismatch, "linear " + prefix + ": input width " +
                                   std::to_string(x.val().cols()) + " vs " +
                                   std::to_string(w.val().rows()));
  Value<T> y = ops::matmul(x, w);
  if (bias) y = ops::add_rowvec(y, param(tape, store, prefix + ".b"));
  return y;
}

// ---------------------------------------------------------------------------
// LSTM
// ---------------------------------------------------------------------------

template <typename T>
void declare_lstm(ParameterStore<T>& store, Rng& rng, const std::string& prefix,
                  std::size_t in, std::size_t hidden) {
  store.add_xavier(prefix + ".wx", in, 4 * hidden, rng);
  store.add_xavier(prefix + ".wh", hidden, 4 * hidden, rng);
  store.add_zeros(prefix + ".b", 1, 4 * hidden);
}

// Final hidden state of a unidirectional LSTM read over the rows of `emb`
// (optionally in reverse). Gate layout: [input, forget, cell, output].
template <typename T>
Value<T> lstm_final(Tape<T>& tape, ParameterStore<T>& store, const std::string& prefix,
                    Value<T> emb, bool reverse) {
  const std::size_t len = emb.val().rows();
  if (len == 0) fail(Errc::empty_sequence, "lstm_final: empty sequence");
  const std::size_t hidden = store.at(prefix + ".wh").rows();
  Value<T> wx = param(tape, store, prefix + ".wx");
  Value<T> wh = param(tape, store, prefix + ".wh");
  Value<T> b = param(tape, store, prefix + ".b");
  Value<T> h = tape.leaf(1, hidden);
  Value<T> c = tape.leaf(1, hidden);
  for (std::size_t step = 0; step < len; ++step) {
    const std::size_t t = reverse ? len - 1 - step : step;
    Value<T> x = ops::slice_rows(emb, t, t + 1);
    Value<T> gates = ops::add_rowvec(ops::add(ops::matmul(x, wx), ops::matmul(h, wh)), b);
    Value<T> gi = ops::sigmoid_v(ops::slice_cols(gates, 0, hidden));
    Value<T> gf = ops::sigmoid_v(ops::slice_cols(gates, hidden, 2 * hidden));
    Value<T> gg = ops::tanh_v(ops::slice_cols(gates, 2 * hidden, 3 * hidden));
    Value<T> go = ops::sigmoid_v(ops::slice_cols(gates, 3 * hidden, 4 * hidden));
    c = ops::add(ops::mul(gf, c), ops::mul(gi, gg));
    h = ops::mul(go, ops::tanh_v(c));
  }
  return h;
}

template <typename T>
void declare_bilstm(ParameterStore<T>& store, Rng& rng, const std::string& prefix,
                    std::size_t in, std::size_t hidden) {
  declare_lstm(store, rng, prefix + ".fwd", in, hidden);
  declare_lstm(store, rng, prefix + ".bwd", in, hidden);
}

// Concatenation of the forward direction's last state (token L) and the
// backward direction's last state (token 1). Output width 2*hidden.
template <typename T>
Value<T> bilstm_final(Tape<T>& tape, ParameterStore<T>& store, const std::string& prefix,
                      Value<T> emb) {
  Value<T> fwd = lstm_final(tape, store, prefix + ".fwd", emb, false);
  Value<T> bwd = lstm_final(tape, store, prefix + ".bwd", emb, true);
  return ops::concat_cols(fwd, bwd);
}

// ---------------------------------------------------------------------------
// Layer normalization with stored gain/bias
// ---------------------------------------------------------------------------

template <typename T>
void declare_layer_norm(ParameterStore<T>& store, const std::string& prefix, std::size_t dim) {
  store.add_ones(prefix + ".g", 1, dim);
  store.add_zeros(prefix + ".b", 1, dim);
}

template <typename T>
Value<T> layer_norm(Tape<T>& tape, ParameterStore<T>& store, const std::string& prefix,
                    Value<T> x) {
  return ops::layer_norm(x, param(tape, store, prefix + ".g"),
                         param(tape, store, prefix + ".b"));
}

// ---------------------------------------------------------------------------
// Attention masks
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> causal_mask(std::size_t n) {
  Tensor<T> m(n, n);
  const T ninf = -std::numeric_limits<T>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m(i, j) = ninf;
  return m;
}

// Additive mask from adjacency lists with implicit self-loops.
template <typename T>
Tensor<T> adjacency_mask(const std::vector<std::vector<int>>& adjacency) {
  const std::size_t n = adjacency.size();
  const T ninf = -std::numeric_limits<T>::infinity();
  Tensor<T> m = Tensor<T>::full(n, n, ninf);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = T(0);
    for (int j : adjacency[i]) m(i, static_cast<std::size_t>(j)) = T(0);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Multi-head attention
// ---------------------------------------------------------------------------

template <typename T>
void declare_mha(ParameterStore<T>& store, Rng& rng, const std::string& prefix,
                 std::size_t dim) {
  declare_linear(store, rng, prefix + ".q", dim, dim);
  declare_linear(store, rng, prefix + ".k", dim, dim);
  declare_linear(store, rng, prefix + ".v", dim, dim);
  declare_linear(store, rng, prefix + ".o", dim, dim);
}

// Scaled dot-product attention, heads split by column blocks, additive
// masking before softmax, concatenated heads through an output projection.
template <typename T>
Value<T> multi_head_attention(Tape<T>& tape, ParameterStore<T>& store,
                              const std::string& prefix, Value<T> queries, Value<T> keys_vals,
                              std::size_t heads, const Tensor<T>* mask = nullptr) {
  const std::size_t dim = queries.val().cols();
  if (dim == 0 || heads == 0 || dim % heads != 0)
    fail(Errc::shape_mismatch, "multi_head_attention: width " + std::to_string(dim) +
                                   " not divisible by " + std::to_string(heads) + " heads");
  if (keys_vals.val().cols() != dim)
    fail(Errc::shape_mismatch, "multi_head_attention: query/key width mismatch");
  const std::size_t dh = dim / heads;
  Value<T> q = linear(tape, store, prefix + ".q", queries);
  Value<T> k = linear(tape, store, prefix + ".k", keys_vals);
  Value<T> v = linear(tape, store, prefix + ".v", keys_vals);
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));
  Value<T> ctx;
  for (std::size_t h = 0; h < heads; ++h) {
    Value<T> qh = ops::slice_cols(q, h * dh, (h + 1) * dh);
    Value<T> kh = ops::slice_cols(k, h * dh, (h + 1) * dh);
    Value<T> vh = ops::slice_cols(v, h * dh, (h + 1) * dh);
    Value<T> scores = ops::scale(ops::matmul(qh, ops::transpose(kh)), scale);
    Value<T> alpha = ops::softmax_rows(scores, mask);
    Value<T> ch = ops::matmul(alpha, vh);
    ctx = h == 0 ? ch : ops::concat_cols(ctx, ch);
  }
  return linear(tape, store, prefix + ".o", ctx);
}

// ---------------------------------------------------------------------------
// Knowledge-graph cross-attention (single-head, unscaled)
// ---------------------------------------------------------------------------

// u_i = sum_j softmax_j(s_i . e_j) e_j, exactly as the integration formulas
// are written: one head, no scaling. An empty graph yields zero vectors.
template <typename T>
Value<T> kg_cross_attention(Tape<T>& tape, Value<T> decoder_states,
                            std::optional<Value<T>> node_embeddings) {
  const std::size_t t = decoder_states.val().rows();
  const std::size_t d = decoder_states.val().cols();
  if (!node_embeddings.has_value() || node_embeddings->val().rows() == 0)
    return tape.leaf(t, d);
  if (node_embeddings->val().cols() != d)
    fail(Errc::shape_mismatch, "kg_cross_attention: node embedding width");
  Value<T> beta = ops::matmul(decoder_states, ops::transpose(*node_embeddings));
  Value<T> alpha = ops::softmax_rows(beta);
  return ops::matmul(alpha, *node_embeddings);
}

// ---------------------------------------------------------------------------
// Graph attention
// ---------------------------------------------------------------------------

template <typename T>
void declare_gat_layer(ParameterStore<T>& store, Rng& rng, const std::string& prefix,
                       std::size_t in, std::size_t head_dim, std::size_t heads) {
  for (std::size_t h = 0; h < heads; ++h) {
    const std::string hp = prefix + ".h" + std::to_string(h);
    store.add_xavier(hp + ".w", in, head_dim, rng);
    store.add_xavier(hp + ".al", head_dim, 1, rng);
    store.add_xavier(hp + ".ar", head_dim, 1, rng);
  }
}

// One graph-attention layer: per head, LeakyReLU-scored attention over the
// neighborhood (self-loop included via the mask), softmax, aggregate.
// Heads concatenate, or average on the final layer; ELU on the way out.
// Dropout hits the attention weights in training mode only.
template <typename T>
Value<T> gat_layer(Tape<T>& tape, ParameterStore<T>& store, const std::string& prefix,
                   Value<T> node_feats, const Tensor<T>& adj_mask, std::size_t heads,
                   bool average_heads, double attn_dropout) {
  const std::size_t n = node_feats.val().rows();
  if (adj_mask.rows() != n || adj_mask.cols() != n)
    fail(Errc::shape_mismatch, "gat_layer: mask size");
  if (store.at(prefix + ".h0.w").rows() != node_feats.val().cols())
    fail(Errc::shape_mismatch, "gat_layer: feature width vs params");
  Value<T> out;
  for (std::size_t h = 0; h < heads; ++h) {
    const std::string hp = prefix + ".h" + std::to_string(h);
    Value<T> wh = ops::matmul(node_feats, param(tape, store, hp + ".w"));
    Value<T> left = ops::matmul(wh, param(tape, store, hp + ".al"));    // n x 1
    Value<T> right = ops::matmul(wh, param(tape, store, hp + ".ar"));   // n x 1
    Value<T> scores = ops::leaky_relu(ops::broadcast_sum(left, right), T(0.2));
    Value<T> alpha = ops::softmax_rows(scores, &adj_mask);
    alpha = ops::dropout(alpha, attn_dropout);
    Value<T> head_out = ops::matmul(alpha, wh);
    if (h == 0)
      out = head_out;
    else
      out = average_heads ? ops::add(out, head_out) : ops::concat_cols(out, head_out);
  }
  if (average_heads && heads > 1) out = ops::scale(out, T(1) / static_cast<T>(heads));
  return ops::elu(out);
}

// ---------------------------------------------------------------------------
// Small helpers shared by models
// ---------------------------------------------------------------------------

template <typename T>
inline int row_argmax(const Tensor<T>& t, std::size_t row) {
  int best = 0;
  T best_v = t(row, 0);
  for (std::size_t j = 1; j < t.cols(); ++j)
    if (t(row, j) > best_v) {
      best_v = t(row, j);
      best = static_cast<int>(j);
    }
  return best;
}

// Log-softmax of one logits row, computed outside the tape (decoding).
template <typename T>
inline std::vector<double> log_softmax_row(const Tensor<T>& logits, std::size_t row) {
  const std::size_t v = logits.cols();
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < v; ++j) mx = std::max(mx, static_cast<double>(logits(row, j)));
  double sum = 0.0;
  for (std::size_t j = 0; j < v; ++j) sum += std::exp(static_cast<double>(logits(row, j)) - mx);
  const double log_sum = std::log(sum);
  std::vector<double> out(v);
  for (std::size_t j = 0; j < v; ++j)
    out[j] = static_cast<double>(logits(row, j)) - mx - log_sum;
  return out;
}

}  // namespace factsum::neuro

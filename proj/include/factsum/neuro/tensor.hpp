#pragma once

// Dense row-major tensors plus a deterministic RNG. All tape operations work
// on 2D shapes; vectors are 1xN or Nx1. The scalar type is a template
// parameter: double for gradient checks, float for training runs.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "factsum/error.hpp"

namespace factsum::neuro {

template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty, or same length as data

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c) : shape{r, c}, data(r * c, T(0)) {}

  static Tensor zeros(std::size_t r, std::size_t c) { return Tensor(r, c); }
  static Tensor full(std::size_t r, std::size_t c, T v) {
    Tensor t(r, c);
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }
  static Tensor from(std::size_t r, std::size_t c, std::vector<T> values) {
    Tensor t;
    t.shape = {r, c};
    if (values.size() != r * c) fail(Errc::shape_mismatch, "Tensor::from: size mismatch");
    t.data = std::move(values);
    return t;
  }

  std::size_t size() const { return data.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? (shape.empty() ? 0 : 1) : shape[1]; }

  T& operator()(std::size_t i, std::size_t j) { return data[i * cols() + j]; }
  T operator()(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), T(0));
  }
  void zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), T(0));
  }
  bool has_grad() const { return grad.size() == data.size() && !data.empty(); }
};

template <typename T>
inline std::string shape_str(const Tensor<T>& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.shape.size(); ++i)
    s += (i ? "x" : "") + std::to_string(t.shape[i]);
  return s + ")";
}

// Deterministic RNG: mt19937_64 outputs scaled by hand so results do not
// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    // splitmix64; tiny, seedable and identical everywhere
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::size_t index(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(next_u64() % n); }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) std::swap(first[i - 1], first[index(i)]);
  }

 private:
  std::uint64_t state_;
};

// Raw matrix kernels shared by forward and backward passes.
namespace kernel {

// C (+)= A * B, with optional transposes; accumulate adds into C.
template <typename T>
void matmul(const Tensor<T>& a, bool ta, const Tensor<T>& b, bool tb, Tensor<T>& c,
            bool accumulate_into_grad = false) {
  const std::size_t m = ta ? a.cols() : a.rows();
  const std::size_t k = ta ? a.rows() : a.cols();
  const std::size_t kb = tb ? b.cols() : b.rows();
  const std::size_t n = tb ? b.rows() : b.cols();
  if (k != kb) fail(Errc::shape_mismatch, "matmul: inner dims " + std::to_string(k) + " vs " +
                                              std::to_string(kb));
  std::vector<T>& out = accumulate_into_grad ? c.grad : c.data;
  if (!accumulate_into_grad) {
    c.shape = {m, n};
    c.data.assign(m * n, T(0));
  }
  const T* pa = a.data.data();
  const T* pb = b.data.data();
  T* pc = accumulate_into_grad ? out.data() : c.data.data();
  const std::size_t ac = a.cols(), bc = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t kk = 0; kk < k; ++kk) {
      const T av = ta ? pa[kk * ac + i] : pa[i * ac + kk];
      if (av == T(0)) continue;
      const std::size_t boff = tb ? kk : kk * bc;
      T* crow = pc + i * n;
      if (!tb) {
        const T* brow = pb + boff;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      } else {
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * pb[j * bc + boff];
      }
    }
  }
}

}  // namespace kernel

}  // namespace factsum::neuro

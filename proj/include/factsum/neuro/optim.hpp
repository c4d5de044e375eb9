#pragma once

// Adam with bias correction, optional linear warmup/decay scheduling and
// global-norm clipping, plus the central-difference gradient checker used
// as the independent oracle in tests.

#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "factsum/neuro/store.hpp"

namespace factsum::neuro {

template <typename T>
struct AdamState {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;

  struct Moments {
    std::vector<double> m, v;
  };
  std::map<std::string, Moments> moments;
};

// One Adam update over every parameter; gradients must be populated and are
// zeroed afterwards. `lr_mult` scales the step (warmup/decay schedules).
template <typename T>
void adam_step(ParameterStore<T>& store, AdamState<T>& state, double lr_mult = 1.0) {
  ++state.step;
  const double b1 = state.beta1, b2 = state.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  const double lr = state.lr * lr_mult;
  for (auto& [name, p] : store) {
    if (!p.has_grad())
      fail(Errc::missing_gradient, "adam_step: no gradient for " + name);
    auto& mom = state.moments[name];
    if (mom.m.size() != p.size()) {
      mom.m.assign(p.size(), 0.0);
      mom.v.assign(p.size(), 0.0);
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double g = static_cast<double>(p.grad[k]);
      mom.m[k] = b1 * mom.m[k] + (1.0 - b1) * g;
      mom.v[k] = b2 * mom.v[k] + (1.0 - b2) * g * g;
      const double mhat = mom.m[k] / bc1;
      const double vhat = mom.v[k] / bc2;
      p.data[k] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + state.eps));
    }
    p.zero_grad();
  }
}

// Scales all gradients so their global L2 norm is at most `max_norm`.
// A non-positive max_norm disables clipping.
template <typename T>
double clip_grad_norm(ParameterStore<T>& store, double max_norm) {
  double sq = 0.0;
  for (auto& [name, p] : store)
    for (std::size_t k = 0; k < p.grad.size(); ++k)
      sq += static_cast<double>(p.grad[k]) * static_cast<double>(p.grad[k]);
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const T s = static_cast<T>(max_norm / norm);
    for (auto& [name, p] : store)
      for (auto& g : p.grad) g *= s;
  }
  return norm;
}

// ---------------------------------------------------------------------------
// Finite-difference oracle
// ---------------------------------------------------------------------------

// fn builds a scalar loss on the given tape from leaves mirroring `inputs`.
// The analytic side comes from one reverse pass; the numeric side from
// central differences, optionally over a sampled subset of coordinates.
// Returns max over checked coordinates of |analytic - numeric| / max(1, |numeric|).
template <typename T, typename Fn>
double finite_diff_check(Fn&& fn, std::vector<Tensor<T>> inputs, double h = 1e-5,
                         std::size_t max_coords_per_input = 0, Rng* sampler = nullptr) {
  // analytic gradients
  std::vector<std::vector<T>> analytic;
  {
    Tape<T> tape;
    std::vector<Value<T>> leaves;
    leaves.reserve(inputs.size());
    for (const auto& t : inputs) leaves.push_back(tape.leaf(t));
    Value<T> loss = fn(tape, leaves);
    if (loss.val().size() != 1) fail(Errc::shape_mismatch, "finite_diff_check: non-scalar");
    tape.backward(loss);
    for (const auto& lv : leaves) {
      const auto& n = tape.node(lv.idx).val;
      analytic.push_back(n.has_grad() ? n.grad : std::vector<T>(n.size(), T(0)));
    }
  }

  auto eval = [&](const std::vector<Tensor<T>>& xs) -> double {
    Tape<T> tape;
    std::vector<Value<T>> leaves;
    leaves.reserve(xs.size());
    for (const auto& t : xs) leaves.push_back(tape.leaf(t));
    Value<T> loss = fn(tape, leaves);
    return static_cast<double>(loss.val().data[0]);
  };

  double worst = 0.0;
  for (std::size_t which = 0; which < inputs.size(); ++which) {
    const std::size_t total = inputs[which].size();
    std::vector<std::size_t> coords;
    if (max_coords_per_input == 0 || total <= max_coords_per_input) {
      coords.resize(total);
      for (std::size_t k = 0; k < total; ++k) coords[k] = k;
    } else {
      for (std::size_t k = 0; k < max_coords_per_input; ++k)
        coords.push_back(sampler ? sampler->index(total) : (k * total) / max_coords_per_input);
    }
    for (const auto k : coords) {
      const T saved = inputs[which].data[k];
      inputs[which].data[k] = saved + static_cast<T>(h);
      const double fp = eval(inputs);
      inputs[which].data[k] = saved - static_cast<T>(h);
      const double fm = eval(inputs);
      inputs[which].data[k] = saved;
      const double numeric = (fp - fm) / (2.0 * h);
      const double err = std::abs(static_cast<double>(analytic[which][k]) - numeric) /
                         std::max(1.0, std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace factsum::neuro

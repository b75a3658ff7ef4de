// Adam with bias correction, applied tensor-by-tensor to an LstmParams
// bundle. The elementwise core is exposed separately so it can be tested
// on plain vectors.
#pragma once

#include <cmath>
#include <string>

#include "epf/error.hpp"
#include "epf/lstm.hpp"

namespace epf {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One bias-corrected Adam update on a single tensor. `step` is 1-based.
template <typename T>
void adam_update(T& param, const T& grad, T& m, T& v, int step, const AdamConfig& cfg) {
  using S = typename T::Scalar;
  const S b1 = static_cast<S>(cfg.beta1);
  const S b2 = static_cast<S>(cfg.beta2);
  const S lr = static_cast<S>(cfg.learning_rate);
  const S eps = static_cast<S>(cfg.epsilon);
  m.array() = b1 * m.array() + (S(1) - b1) * grad.array();
  v.array() = b2 * v.array() + (S(1) - b2) * grad.array().square();
  const S c1 = S(1) - static_cast<S>(std::pow(static_cast<double>(b1), step));
  const S c2 = S(1) - static_cast<S>(std::pow(static_cast<double>(b2), step));
  param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

template <typename S>
struct AdamState {
  LstmParams<S> m;
  LstmParams<S> v;
  int step = 0;

  static AdamState zeros_like(const LstmParams<S>& params) {
    AdamState s;
    s.m = params;
    s.v = params;
    s.m.set_zero();
    s.v.set_zero();
    return s;
  }
};

template <typename S>
void adam_step(LstmParams<S>& params, const LstmParams<S>& grads, AdamState<S>& state,
               const AdamConfig& cfg) {
  if (!grads.all_finite()) fail(ErrorClass::numeric, "adam: non-finite gradient");
  ++state.step;
  const int step = state.step;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& g = grads.layers[l];
    adam_update(params.layers[l].wx, g.wx, state.m.layers[l].wx, state.v.layers[l].wx, step, cfg);
    adam_update(params.layers[l].wh, g.wh, state.m.layers[l].wh, state.v.layers[l].wh, step, cfg);
    adam_update(params.layers[l].b, g.b, state.m.layers[l].b, state.v.layers[l].b, step, cfg);
  }
  adam_update(params.head_w, grads.head_w, state.m.head_w, state.v.head_w, step, cfg);
  adam_update(params.head_b, grads.head_b, state.m.head_b, state.v.head_b, step, cfg);
}

}  // namespace epf

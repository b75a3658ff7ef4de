// Stacked LSTM with a two-output Gaussian head (mean and standard
// deviation of the normalized price). Forward and backward run batched
// over samples; gate order in the packed weight matrices is
// [input | forget | candidate | output].
//
// The scalar type is a template parameter: double for training that has
// to survive gradient checks, float as the faster option.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "epf/error.hpp"
#include "epf/normalization.hpp"
#include "epf/rng.hpp"

namespace epf {

template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

struct LstmConfig {
  int depth = 2;
  int width = 32;
  int input_width = 0;  // number of feature columns; set at init
  int seq_len = 96;
  double dropout = 0.2;
  double sigma_floor = 0.01;     // lower bound on normalized sigma
  double learning_rate = 1e-3;
  int batch_size = 64;
  int patience = 200;            // early-stopping patience in epochs
  int max_epochs = 2000;
};

// One layer's parameters. wx: [in x 4W], wh: [W x 4W], b: [4W].
template <typename S>
struct LstmLayer {
  MatX<S> wx;
  MatX<S> wh;
  VecX<S> b;
};

template <typename S>
struct LstmParams {
  std::vector<LstmLayer<S>> layers;
  MatX<S> head_w;  // 2 x W
  VecX<S> head_b;  // 2

  template <typename F>
  void visit(F&& f) {
    for (auto& l : layers) {
      f(l.wx);
      f(l.wh);
      f(l.b);
    }
    f(head_w);
    f(head_b);
  }

  void set_zero() {
    visit([](auto& t) { t.setZero(); });
  }

  bool all_finite() const {
    bool ok = true;
    const_cast<LstmParams*>(this)->visit([&](auto& t) { ok = ok && t.allFinite(); });
    return ok;
  }
};

template <typename S>
struct LstmModel {
  LstmConfig config;
  NormalizationSpec norm;
  LstmParams<S> params;
};

// Weights uniform in +-1/sqrt(width); forget-gate biases 1, others 0.
template <typename S>
LstmModel<S> init_lstm_model(const LstmConfig& config, const NormalizationSpec& norm, Rng& rng) {
  if (config.input_width <= 0 || config.width <= 0 || config.depth <= 0)
    fail(ErrorClass::config, "lstm init: depth, width and input_width must be positive");
  LstmModel<S> m;
  m.config = config;
  m.norm = norm;
  const int w = config.width;
  const double bound = 1.0 / std::sqrt(static_cast<double>(w));
  auto fill_uniform = [&](MatX<S>& t, int rows, int cols) {
    t.resize(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        t(r, c) = static_cast<S>(rng.uniform(-bound, bound));
  };
  m.params.layers.resize(static_cast<std::size_t>(config.depth));
  for (int l = 0; l < config.depth; ++l) {
    int in = l == 0 ? config.input_width : w;
    auto& layer = m.params.layers[static_cast<std::size_t>(l)];
    fill_uniform(layer.wx, in, 4 * w);
    fill_uniform(layer.wh, w, 4 * w);
    layer.b = VecX<S>::Zero(4 * w);
    layer.b.segment(w, w).setConstant(static_cast<S>(1.0));  // forget gate
  }
  fill_uniform(m.params.head_w, 2, w);
  m.params.head_b = VecX<S>::Zero(2);
  return m;
}

enum class ForwardMode { train, eval };

// Everything backward needs, kept per (layer, time step).
template <typename S>
struct ForwardCache {
  int batch = 0;
  int steps = 0;
  std::vector<std::vector<MatX<S>>> gate_i, gate_f, gate_g, gate_o;  // [L][T], B x W
  std::vector<std::vector<MatX<S>>> cell, tanh_cell;                 // [L][T]
  std::vector<std::vector<MatX<S>>> inputs;  // [L][T]: layer input (dropped output of the layer below)
  std::vector<std::vector<MatX<S>>> masks;   // [L][T]: dropout scales, empty unless dropout > 0
  MatX<S> final_hidden_dropped;              // B x W, feeds the head
  VecX<S> raw_mu, raw_sigma;
  VecX<S> mu, sigma;
};

namespace detail {

template <typename S>
inline S softplus(S x) {
  return std::max<S>(x, S(0)) + std::log1p(std::exp(-std::abs(x)));
}

template <typename S>
inline S sigmoid(S x) {
  return S(1) / (S(1) + std::exp(-x));
}

template <typename S>
void resize_cache(ForwardCache<S>& c, int depth, int steps, bool with_masks) {
  auto grid = [&](std::vector<std::vector<MatX<S>>>& v) {
    v.resize(static_cast<std::size_t>(depth));
    for (auto& row : v) row.resize(static_cast<std::size_t>(steps));
  };
  grid(c.gate_i);
  grid(c.gate_f);
  grid(c.gate_g);
  grid(c.gate_o);
  grid(c.cell);
  grid(c.tanh_cell);
  grid(c.inputs);
  if (with_masks)
    grid(c.masks);
  else
    c.masks.clear();
  c.steps = steps;
}

}  // namespace detail

// Batched forward. `input_seq` holds one B x F matrix per time step.
// Train mode applies inverted dropout to every layer's output sequence
// (masks drawn from `rng`) and fills the cache; eval mode is a pure
// function of (model, inputs).
template <typename S>
void lstm_forward_batch(const LstmModel<S>& model, const std::vector<MatX<S>>& input_seq,
                        ForwardMode mode, Rng& rng, ForwardCache<S>& cache) {
  const int depth = model.config.depth;
  const int w = model.config.width;
  const int steps = static_cast<int>(input_seq.size());
  if (steps == 0) fail(ErrorClass::data, "lstm forward: empty input sequence");
  const int batch = static_cast<int>(input_seq[0].rows());
  if (input_seq[0].cols() != model.config.input_width)
    fail(ErrorClass::data, "lstm forward: input width " + std::to_string(input_seq[0].cols()) +
                               " does not match model input width " +
                               std::to_string(model.config.input_width));

  const bool train = mode == ForwardMode::train;
  const bool use_dropout = train && model.config.dropout > 0.0;
  const S keep = static_cast<S>(1.0 - model.config.dropout);

  cache.batch = batch;
  detail::resize_cache(cache, depth, steps, use_dropout);

  MatX<S> h(batch, w), c(batch, w), z(batch, 4 * w);
  MatX<S> dropped;
  std::vector<MatX<S>> eval_seq;  // layer outputs when not caching
  if (!train) eval_seq.resize(static_cast<std::size_t>(steps));

  for (int l = 0; l < depth; ++l) {
    const auto& layer = model.params.layers[static_cast<std::size_t>(l)];
    h.setZero();
    c.setZero();
    for (int t = 0; t < steps; ++t) {
      const MatX<S>& x = l == 0 ? input_seq[static_cast<std::size_t>(t)]
                         : train ? cache.inputs[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)]
                                 : eval_seq[static_cast<std::size_t>(t)];
      z.noalias() = x * layer.wx;
      z.noalias() += h * layer.wh;
      z.rowwise() += layer.b.transpose();

      auto gi = (S(1) / (S(1) + (-z.middleCols(0, w).array()).exp())).eval();
      auto gf = (S(1) / (S(1) + (-z.middleCols(w, w).array()).exp())).eval();
      auto gg = z.middleCols(2 * w, w).array().tanh().eval();
      auto go = (S(1) / (S(1) + (-z.middleCols(3 * w, w).array()).exp())).eval();

      c.array() = gf * c.array() + gi * gg;
      auto tc = c.array().tanh().eval();
      h.array() = go * tc;

      if (!h.allFinite())
        fail(ErrorClass::numeric, "lstm forward: non-finite activation at layer " +
                                      std::to_string(l) + ", step " + std::to_string(t));

      if (train) {
        auto& cl = cache;
        cl.gate_i[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)] = gi.matrix();
        cl.gate_f[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)] = gf.matrix();
        cl.gate_g[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)] = gg.matrix();
        cl.gate_o[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)] = go.matrix();
        cl.cell[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)] = c;
        cl.tanh_cell[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)] = tc.matrix();
      }

      dropped = h;
      if (use_dropout) {
        MatX<S>& mask = cache.masks[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)];
        mask.resize(batch, w);
        for (int r = 0; r < batch; ++r)
          for (int col = 0; col < w; ++col)
            mask(r, col) = rng.uniform() < static_cast<double>(keep) ? S(1) / keep : S(0);
        dropped.array() *= mask.array();
      }

      if (l + 1 < depth) {
        if (train)
          cache.inputs[static_cast<std::size_t>(l) + 1][static_cast<std::size_t>(t)] = dropped;
        else
          eval_seq[static_cast<std::size_t>(t)] = dropped;
      } else if (t == steps - 1) {
        cache.final_hidden_dropped = dropped;
      }
    }
  }

  // head: raw outputs, then sigma through softplus + floor
  MatX<S> raw = cache.final_hidden_dropped * model.params.head_w.transpose();
  raw.rowwise() += model.params.head_b.transpose();
  cache.raw_mu = raw.col(0);
  cache.raw_sigma = raw.col(1);
  cache.mu = cache.raw_mu;
  cache.sigma.resize(batch);
  const S floor = static_cast<S>(model.config.sigma_floor);
  for (int i = 0; i < batch; ++i)
    cache.sigma(i) = detail::softplus(cache.raw_sigma(i)) + floor;
}

template <typename S>
struct ForwardResult {
  S mu_norm;
  S sigma_norm;
  ForwardCache<S> cache;
};

// Single-window forward; `inputs` is seq_len x F.
template <typename S>
ForwardResult<S> lstm_forward(const LstmModel<S>& model, const MatX<S>& inputs, ForwardMode mode,
                              Rng& rng) {
  std::vector<MatX<S>> seq(static_cast<std::size_t>(inputs.rows()));
  for (Eigen::Index t = 0; t < inputs.rows(); ++t)
    seq[static_cast<std::size_t>(t)] = inputs.row(t);
  ForwardResult<S> res;
  lstm_forward_batch(model, seq, mode, rng, res.cache);
  res.mu_norm = res.cache.mu(0);
  res.sigma_norm = res.cache.sigma(0);
  return res;
}

// Gradients of the mean NLL over the batch with respect to every
// parameter. The cache must come from a train-mode forward on the same
// inputs. Returns the batch loss.
template <typename S>
S lstm_backward(const LstmModel<S>& model, const ForwardCache<S>& cache,
                const std::vector<MatX<S>>& input_seq, const VecX<S>& targets,
                LstmParams<S>& grads) {
  const int depth = model.config.depth;
  const int w = model.config.width;
  const int steps = cache.steps;
  const int batch = cache.batch;
  if (targets.size() != batch)
    fail(ErrorClass::data, "lstm backward: target count does not match batch");
  if (static_cast<int>(cache.gate_i.size()) != depth)
    fail(ErrorClass::data, "lstm backward: cache does not match model depth");

  // loss and head gradient
  const S inv_b = S(1) / static_cast<S>(batch);
  S loss = S(0);
  MatX<S> draw(batch, 2);
  for (int i = 0; i < batch; ++i) {
    S sigma = cache.sigma(i);
    S r = cache.mu(i) - targets(i);
    loss += S(0.5) * std::log(S(2) * static_cast<S>(M_PI) * sigma * sigma) +
            r * r / (S(2) * sigma * sigma);
    S dmu = r / (sigma * sigma) * inv_b;
    S dsigma = (S(1) / sigma - r * r / (sigma * sigma * sigma)) * inv_b;
    draw(i, 0) = dmu;
    draw(i, 1) = dsigma * detail::sigmoid(cache.raw_sigma(i));
  }
  loss *= inv_b;

  grads.layers.resize(static_cast<std::size_t>(depth));
  for (int l = 0; l < depth; ++l) {
    const auto& p = model.params.layers[static_cast<std::size_t>(l)];
    auto& g = grads.layers[static_cast<std::size_t>(l)];
    g.wx = MatX<S>::Zero(p.wx.rows(), p.wx.cols());
    g.wh = MatX<S>::Zero(p.wh.rows(), p.wh.cols());
    g.b = VecX<S>::Zero(p.b.size());
  }
  grads.head_w.noalias() = draw.transpose() * cache.final_hidden_dropped;
  grads.head_b = draw.colwise().sum().transpose();

  // gradient w.r.t. the dropped output sequence of the current layer
  std::vector<MatX<S>> d_above(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t)
    d_above[static_cast<std::size_t>(t)] = MatX<S>::Zero(batch, w);
  d_above[static_cast<std::size_t>(steps - 1)].noalias() = draw * model.params.head_w;

  const bool use_dropout = !cache.masks.empty();
  MatX<S> dh(batch, w), dc(batch, w), dz(batch, 4 * w), hprev(batch, w);

  for (int l = depth - 1; l >= 0; --l) {
    const auto& p = model.params.layers[static_cast<std::size_t>(l)];
    auto& g = grads.layers[static_cast<std::size_t>(l)];
    const auto& gi = cache.gate_i[static_cast<std::size_t>(l)];
    const auto& gf = cache.gate_f[static_cast<std::size_t>(l)];
    const auto& gg = cache.gate_g[static_cast<std::size_t>(l)];
    const auto& go = cache.gate_o[static_cast<std::size_t>(l)];
    const auto& cc = cache.cell[static_cast<std::size_t>(l)];
    const auto& tc = cache.tanh_cell[static_cast<std::size_t>(l)];

    std::vector<MatX<S>> d_below;
    if (l > 0) {
      d_below.resize(static_cast<std::size_t>(steps));
      for (int t = 0; t < steps; ++t)
        d_below[static_cast<std::size_t>(t)] = MatX<S>::Zero(batch, w);
    }

    dh.setZero();
    dc.setZero();
    for (int t = steps - 1; t >= 0; --t) {
      const std::size_t ts = static_cast<std::size_t>(t);
      const std::size_t ls = static_cast<std::size_t>(l);
      // external contribution arrives on the dropped output
      if (use_dropout)
        dh.array() += d_above[ts].array() * cache.masks[ls][ts].array();
      else
        dh += d_above[ts];

      auto o = go[ts].array();
      auto tcv = tc[ts].array();
      dc.array() += dh.array() * o * (S(1) - tcv * tcv);

      auto i_ = gi[ts].array();
      auto f_ = gf[ts].array();
      auto g_ = gg[ts].array();

      dz.middleCols(3 * w, w).array() = dh.array() * tcv * o * (S(1) - o);       // output gate
      dz.middleCols(0, w).array() = dc.array() * g_ * i_ * (S(1) - i_);          // input gate
      dz.middleCols(2 * w, w).array() = dc.array() * i_ * (S(1) - g_ * g_);      // candidate
      if (t > 0)
        dz.middleCols(w, w).array() = dc.array() * cc[ts - 1].array() * f_ * (S(1) - f_);
      else
        dz.middleCols(w, w).setZero();  // c(-1) = 0

      const MatX<S>& x = l == 0 ? input_seq[ts] : cache.inputs[ls][ts];
      g.wx.noalias() += x.transpose() * dz;
      if (t > 0) {
        hprev.array() = go[ts - 1].array() * tc[ts - 1].array();
        g.wh.noalias() += hprev.transpose() * dz;
      }
      g.b += dz.colwise().sum().transpose();

      if (l > 0) d_below[ts].noalias() = dz * p.wx.transpose();

      if (t > 0) {
        dh.noalias() = dz * p.wh.transpose();
        dc.array() *= f_;
      }
    }
    if (l > 0) d_above = std::move(d_below);
  }
  return loss;
}

}  // namespace epf

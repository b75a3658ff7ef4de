// Mini-batch training of one fold: shuffled epochs, Adam, inverted
// dropout, early stopping on validation NLL with a best-snapshot rule.
#pragma once

#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "epf/adam.hpp"
#include "epf/error.hpp"
#include "epf/lstm.hpp"
#include "epf/rng.hpp"
#include "epf/windows.hpp"

namespace epf {

struct EpochRecord {
  int epoch = 0;            // 0 is the pre-training baseline
  double train_nll = std::numeric_limits<double>::quiet_NaN();
  double val_nll = 0.0;
  double best_val = 0.0;    // best seen up to and including this epoch
  bool improved = false;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  int stopped_epoch = 0;
  std::string stop_reason;  // "early_stop" or "max_epochs"
};

class TrainDivergence : public Error {
 public:
  TrainDivergence(const std::string& msg, TrainingLog log)
      : Error(ErrorClass::train, msg), log(std::move(log)) {}
  TrainingLog log;
};

namespace detail {

// Copies samples [begin, begin+count) of `order` into per-step batch
// matrices, casting to the training scalar.
template <typename S>
void gather_batch(const std::vector<SampleWindow>& samples, const std::vector<std::size_t>& order,
                  std::size_t begin, std::size_t count, std::vector<MatX<S>>& seq,
                  VecX<S>& targets) {
  const Eigen::Index steps = samples[order[begin]].inputs.rows();
  const Eigen::Index width = samples[order[begin]].inputs.cols();
  seq.resize(static_cast<std::size_t>(steps));
  targets.resize(static_cast<Eigen::Index>(count));
  for (Eigen::Index t = 0; t < steps; ++t) {
    MatX<S>& m = seq[static_cast<std::size_t>(t)];
    m.resize(static_cast<Eigen::Index>(count), width);
    for (std::size_t b = 0; b < count; ++b)
      m.row(static_cast<Eigen::Index>(b)) =
          samples[order[begin + b]].inputs.row(t).template cast<S>();
  }
  for (std::size_t b = 0; b < count; ++b)
    targets(static_cast<Eigen::Index>(b)) = static_cast<S>(samples[order[begin + b]].target);
}

}  // namespace detail

// Mean NLL of a model over a window set, eval mode, accumulated in double.
template <typename S>
double evaluate_nll(const LstmModel<S>& model, const std::vector<SampleWindow>& samples) {
  if (samples.empty()) fail(ErrorClass::data, "evaluate: empty sample set");
  Rng rng(0);  // eval mode draws nothing
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<MatX<S>> seq;
  VecX<S> targets;
  ForwardCache<S> cache;
  double acc = 0.0;
  const std::size_t bs = static_cast<std::size_t>(std::max(1, model.config.batch_size));
  for (std::size_t begin = 0; begin < samples.size(); begin += bs) {
    std::size_t count = std::min(bs, samples.size() - begin);
    detail::gather_batch(samples, order, begin, count, seq, targets);
    lstm_forward_batch(model, seq, ForwardMode::eval, rng, cache);
    for (std::size_t b = 0; b < count; ++b) {
      double sigma = static_cast<double>(cache.sigma(static_cast<Eigen::Index>(b)));
      double r = static_cast<double>(cache.mu(static_cast<Eigen::Index>(b))) -
                 static_cast<double>(targets(static_cast<Eigen::Index>(b)));
      acc += 0.5 * std::log(2.0 * M_PI * sigma * sigma) + r * r / (2.0 * sigma * sigma);
    }
  }
  return acc / static_cast<double>(samples.size());
}

template <typename S>
struct TrainResult {
  LstmModel<S> model;
  TrainingLog log;
};

// Trains from scratch on `train`, tracking validation NLL after every
// epoch. Epoch 0 evaluates the freshly initialized model so the returned
// snapshot can never be worse than no training at all.
template <typename S>
TrainResult<S> train_fold(const std::vector<SampleWindow>& train,
                          const std::vector<SampleWindow>& val, const LstmConfig& config_in,
                          const NormalizationSpec& norm, std::uint64_t seed) {
  if (train.empty() || val.empty())
    fail(ErrorClass::data, "train_fold: train and validation sets must be non-empty");
  LstmConfig config = config_in;
  const int width_in = static_cast<int>(train[0].inputs.cols());
  if (config.input_width == 0)
    config.input_width = width_in;
  else if (config.input_width != width_in)
    fail(ErrorClass::config, "train_fold: sample width " + std::to_string(width_in) +
                                 " does not match configured input width " +
                                 std::to_string(config.input_width));

  Rng rng(seed);
  TrainResult<S> out;
  out.model = init_lstm_model<S>(config, norm, rng);
  AdamState<S> adam = AdamState<S>::zeros_like(out.model.params);
  AdamConfig adam_cfg;
  adam_cfg.learning_rate = config.learning_rate;

  TrainingLog& log = out.log;
  auto record = [&](int epoch, double train_nll, double val_nll, double best, bool improved) {
    log.epochs.push_back({epoch, train_nll, val_nll, best, improved});
  };
  auto diverged = [&](int epoch, double val_nll) {
    log.stopped_epoch = epoch;
    log.stop_reason = "divergence";
    throw TrainDivergence("training diverged at epoch " + std::to_string(epoch) +
                              ": validation NLL non-finite",
                          std::move(log));
  };

  double best_val = evaluate_nll(out.model, val);
  if (!std::isfinite(best_val)) diverged(0, best_val);
  LstmParams<S> best_params = out.model.params;
  log.best_epoch = 0;
  record(0, std::numeric_limits<double>::quiet_NaN(), best_val, best_val, true);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<MatX<S>> seq;
  VecX<S> targets;
  ForwardCache<S> cache;
  LstmParams<S> grads = out.model.params;  // shape template

  const std::size_t bs = static_cast<std::size_t>(std::max(1, config.batch_size));
  const int patience = std::max(1, config.patience);  // patience 0 acts as 1
  int wait = 0;
  int epoch = 0;
  for (epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(order);
    double train_acc = 0.0;
    for (std::size_t begin = 0; begin < train.size(); begin += bs) {
      std::size_t count = std::min(bs, train.size() - begin);
      detail::gather_batch(train, order, begin, count, seq, targets);
      try {
        lstm_forward_batch(out.model, seq, ForwardMode::train, rng, cache);
        S loss = lstm_backward(out.model, cache, seq, targets, grads);
        train_acc += static_cast<double>(loss) * static_cast<double>(count);
        adam_step(out.model.params, grads, adam, adam_cfg);
      } catch (const Error& e) {
        // numeric blow-ups mid-batch are divergence, not programming errors
        if (e.error_class() != ErrorClass::numeric) throw;
        log.stopped_epoch = epoch;
        log.stop_reason = "divergence";
        throw TrainDivergence(
            "training diverged at epoch " + std::to_string(epoch) + ": " + e.what(),
            std::move(log));
      }
    }
    double train_nll = train_acc / static_cast<double>(train.size());
    double val_nll = evaluate_nll(out.model, val);
    if (!std::isfinite(val_nll)) {
      record(epoch, train_nll, val_nll, best_val, false);
      diverged(epoch, val_nll);
    }
    bool improved = val_nll < best_val;
    if (improved) {
      best_val = val_nll;
      best_params = out.model.params;
      log.best_epoch = epoch;
      wait = 0;
    } else {
      ++wait;
    }
    record(epoch, train_nll, val_nll, best_val, improved);
    if (wait >= patience) {
      log.stop_reason = "early_stop";
      break;
    }
  }
  if (log.stop_reason.empty()) {
    log.stop_reason = "max_epochs";
    epoch = config.max_epochs;
  }
  log.stopped_epoch = std::min(epoch, config.max_epochs);
  out.model.params = std::move(best_params);
  return out;
}

}  // namespace epf

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "ghl/error.hpp"
#include "ghl/model/checkpoint.hpp"
#include "ghl/model/ghnet.hpp"
#include "ghl/nn/adamw.hpp"
#include "ghl/nn/loss.hpp"
#include "ghl/rng.hpp"

namespace ghl {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  nn::AdamWConfig optimizer{};
  double dropout = kDefaultDropout;
  std::size_t patience = 10;  // epochs without val improvement before stopping
  std::uint64_t seed = 0;
  bool raw_inputs = false;  // skip z-score normalization

  void validate() const {
    auto fail = [](const char* m) { throw Error(ErrorCode::InvalidConfig, m); };
    if (epochs == 0) fail("epochs must be > 0");
    if (batch_size == 0) fail("batch_size must be > 0");
    if (patience == 0) fail("patience must be > 0");
    if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
    const auto& o = optimizer;
    if (!(o.learning_rate > 0.0) || !(o.epsilon > 0.0) || !(o.weight_decay >= 0.0)) {
      fail("learning_rate and epsilon must be > 0, weight_decay >= 0");
    }
    if (!(o.beta1 >= 0.0 && o.beta1 < 1.0) || !(o.beta2 >= 0.0 && o.beta2 < 1.0)) fail("betas must be in [0, 1)");
  }

  nlohmann::ordered_json to_json() const {
    return {{"epochs", epochs},
            {"batch_size", batch_size},
            {"learning_rate", optimizer.learning_rate},
            {"beta1", optimizer.beta1},
            {"beta2", optimizer.beta2},
            {"adam_epsilon", optimizer.epsilon},
            {"weight_decay", optimizer.weight_decay},
            {"dropout", dropout},
            {"patience", patience},
            {"seed", seed},
            {"raw_inputs", raw_inputs}};
  }
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean training-mode MAE over the epoch's batches
  double val_mae = 0.0;     // inference-mode MAE on the validation set
};

struct TrainResult {
  Checkpoint checkpoint;  // parameters of the best validation epoch
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;  // 0 means the initial network was never improved on
  double best_val_mae = 0.0;
  double initial_val_mae = 0.0;
  double final_train_mae = 0.0;  // inference-mode train MAE of the last epoch's parameters
};

/// Mean |prediction - label| in degrees (plain difference, as in the loss).
inline double mean_abs_error(GHNet& net, std::span<const LabeledSample> data) {
  const std::vector<double> pred = net.predict(data);
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) sum += std::abs(pred[i] - data[i].true_heading_deg);
  return sum / static_cast<double>(data.size());
}

inline double median_heading(std::span<const LabeledSample> data) {
  std::vector<double> h;
  h.reserve(data.size());
  for (const auto& s : data) h.push_back(s.true_heading_deg);
  const std::size_t mid = h.size() / 2;
  std::nth_element(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(mid), h.end());
  return h[mid];
}

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Minimizes MAE with AdamW over shuffled mini-batches.
///
/// The output bias starts at the median training heading (the constant that
/// minimizes MAE). Mini-batch order comes from Rng::stream(seed, 2) and
/// dropout masks from Rng::stream(seed, 3). Stops after `patience` epochs
/// without a new best validation MAE; throws Diverged when validation MAE
/// exceeds 10x its initial value three epochs in a row.
inline TrainResult train(const TrainConfig& cfg, std::span<const LabeledSample> train_set,
                         std::span<const LabeledSample> val_set, const EpochCallback& on_epoch = {}) {
  cfg.validate();
  if (train_set.empty() || val_set.empty()) throw Error(ErrorCode::EmptyDataset, "train and val sets must be non-empty");

  GHNet net = GHNet::build(cfg.seed, {cfg.dropout, 0.1, 1e-5});
  net.set_normalization(cfg.raw_inputs ? Normalization::raw() : Normalization::fit(train_set));
  static_cast<nn::Linear*>(net.network().find("fc4"))->bias().values[0] = median_heading(train_set);
  net.dropout().reseed(Rng::stream(cfg.seed, 3).next_u64());

  const std::string config_echo = cfg.to_json().dump();
  auto params = net.network().parameters();
  nn::AdamWState opt(cfg.optimizer, params);
  Rng order_rng = Rng::stream(cfg.seed, 2);

  TrainResult result;
  result.initial_val_mae = mean_abs_error(net, val_set);
  result.best_val_mae = result.initial_val_mae;
  result.checkpoint = capture(net, config_echo);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<VelocityNE> batch_v;
  std::size_t since_best = 0;
  std::size_t diverged_run = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(order, order_rng);
    net.network().set_mode(nn::Mode::Training);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, order.size() - start);
      batch_v.clear();
      nn::Tensor target(nn::Shape{n, 1});
      for (std::size_t i = 0; i < n; ++i) {
        const LabeledSample& s = train_set[order[start + i]];
        batch_v.push_back(s.measured);
        target.values[i] = s.true_heading_deg;
      }
      net.network().zero_grad();
      const nn::Tensor out = net.network().forward(net.pack(batch_v));
      const nn::LossResult loss = nn::mae_loss(out, target);
      net.network().backward(loss.grad);
      nn::adamw_step(opt, params);
      loss_sum += loss.value * static_cast<double>(n);
    }

    EpochRecord rec{epoch, loss_sum / static_cast<double>(order.size()), mean_abs_error(net, val_set)};
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (!std::isfinite(rec.val_mae) || rec.val_mae > 10.0 * result.initial_val_mae) {
      if (++diverged_run >= 3) {
        throw Error(ErrorCode::Diverged, "validation MAE above 10x its initial value for 3 epochs");
      }
    } else {
      diverged_run = 0;
    }

    if (rec.val_mae < result.best_val_mae) {
      result.best_val_mae = rec.val_mae;
      result.best_epoch = epoch;
      result.checkpoint = capture(net, config_echo);
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  result.final_train_mae = mean_abs_error(net, train_set);
  return result;
}

}  // namespace ghl

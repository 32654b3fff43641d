#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "multinst/core.hpp"
#include "multinst/rng.hpp"
#include "multinst/stats.hpp"

namespace multinst::train {

// A deliberately small trainable scorer: logistic regression on the observed
// features, optimized with seeded mini-batch gradient descent on the
// soft-label cross-entropy. It stands in for a network at desk scale; scores
// produced by external models can always be fed in through the scores CSV.

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 100;
  int batch_size = 256;
  double val_fraction = 0.2;
  std::uint64_t seed = 1;
};

struct ScorerModel {
  std::vector<double> weights;  // one per feature
  double bias = 0.0;
  TrainConfig config;
};

struct EpochStats {
  double loss_train = 0.0;
  double loss_val = 0.0;
  double auc_val = 0.0;
};

using TrainTrace = std::vector<EpochStats>;

struct TrainSample {
  std::vector<double> features;
  SoftLabel label;
};

/// p = sigmoid(w . x + b).
inline double score(const ScorerModel& model, std::span<const double> features) {
  if (features.size() != model.weights.size()) {
    throw dimension_mismatch_error("feature vector does not match model dimension");
  }
  double z = model.bias;
  for (std::size_t k = 0; k < features.size(); ++k) {
    z += model.weights[k] * features[k];
  }
  return sigmoid(z);
}

/// Soft-label cross-entropy, the minimized (negated) form:
///   -(1/M) sum_i [ w1_i log p_i + w2_i log(1 - p_i) ].
inline double loss(const ScorerModel& model, std::span<const TrainSample> batch) {
  if (batch.empty()) {
    throw domain_error("loss batch must be non-empty");
  }
  constexpr double kLogClamp = 1e-12;
  double total = 0.0;
  for (const TrainSample& s : batch) {
    const double p = std::clamp(score(model, s.features), kLogClamp, 1.0 - kLogClamp);
    total -= s.label.w1 * std::log(p) + s.label.w2 * std::log(1.0 - p);
  }
  return total / static_cast<double>(batch.size());
}

/// Exact gradient of loss: (1/M) sum_i (p_i - w1_i) [x_i, 1]; the last
/// component is the bias partial.
inline std::vector<double> gradient(const ScorerModel& model, std::span<const TrainSample> batch) {
  if (batch.empty()) {
    throw domain_error("gradient batch must be non-empty");
  }
  std::vector<double> g(model.weights.size() + 1, 0.0);
  for (const TrainSample& s : batch) {
    const double r = score(model, s.features) - s.label.w1;
    for (std::size_t k = 0; k < s.features.size(); ++k) {
      g[k] += r * s.features[k];
    }
    g.back() += r;
  }
  const double inv_m = 1.0 / static_cast<double>(batch.size());
  for (double& v : g) {
    v *= inv_m;
  }
  return g;
}

namespace detail {

inline void shuffle(std::vector<std::size_t>& idx, SplitMix64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

inline double validation_auc(const ScorerModel& model, std::span<const TrainSample> data,
                             std::span<const std::size_t> idx) {
  std::vector<ScoredInstance> scored;
  scored.reserve(idx.size());
  for (std::size_t i : idx) {
    scored.push_back(
        ScoredInstance{score(model, data[i].features), data[i].label.w1, data[i].label.w2});
  }
  try {
    return weighted_auc(scored);
  } catch (const error&) {
    return 0.5;  // split put all the weight of one class aside; report chance level
  }
}

inline double subset_loss(const ScorerModel& model, std::span<const TrainSample> data,
                          std::span<const std::size_t> idx) {
  std::vector<TrainSample> subset;
  subset.reserve(idx.size());
  for (std::size_t i : idx) {
    subset.push_back(data[i]);
  }
  return loss(model, subset);
}

}  // namespace detail

/// Mini-batch gradient descent with a fixed learning rate. The dataset is
/// split 80/20 (configurable) into train/validation once, with seeded
/// shuffling; per-epoch loss and weighted validation AUC are recorded.
/// Deterministic for a fixed seed. Non-finite parameters abort training.
inline std::pair<ScorerModel, TrainTrace> fit(std::span<const TrainSample> dataset,
                                              const TrainConfig& config) {
  if (config.batch_size < 1 || config.epochs < 0 || !(config.learning_rate > 0.0)) {
    throw domain_error("invalid training configuration");
  }
  if (!(config.val_fraction >= 0.0) || !(config.val_fraction < 1.0)) {
    throw domain_error("validation fraction must lie in [0, 1)");
  }
  if (dataset.size() < 2 * static_cast<std::size_t>(config.batch_size)) {
    throw insufficient_data_error("dataset smaller than twice the batch size");
  }
  const std::size_t dim = dataset.front().features.size();
  for (const TrainSample& s : dataset) {
    if (s.features.size() != dim) {
      throw dimension_mismatch_error("inconsistent feature dimensions in training data");
    }
  }

  ScorerModel model;
  model.weights.assign(dim, 0.0);
  model.bias = 0.0;
  model.config = config;
  TrainTrace trace;
  if (config.epochs == 0) {
    return {model, trace};
  }

  SplitMix64 rng(derive_stream(config.seed, 0x747261696eULL, 0));  // "train"
  std::vector<std::size_t> idx(dataset.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  detail::shuffle(idx, rng);
  const std::size_t n_val =
      static_cast<std::size_t>(config.val_fraction * static_cast<double>(dataset.size()));
  std::vector<std::size_t> val_idx(idx.end() - static_cast<std::ptrdiff_t>(n_val), idx.end());
  std::vector<std::size_t> train_idx(idx.begin(), idx.end() - static_cast<std::ptrdiff_t>(n_val));

  std::vector<TrainSample> batch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    detail::shuffle(train_idx, rng);
    for (std::size_t start = 0; start < train_idx.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(train_idx.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) {
        batch.push_back(dataset[train_idx[i]]);
      }
      const std::vector<double> g = gradient(model, batch);
      for (std::size_t k = 0; k < dim; ++k) {
        model.weights[k] -= config.learning_rate * g[k];
      }
      model.bias -= config.learning_rate * g.back();
      for (double w : model.weights) {
        if (!std::isfinite(w) || !std::isfinite(model.bias)) {
          throw training_diverged_error("non-finite parameters at epoch " +
                                        std::to_string(epoch));
        }
      }
    }
    EpochStats stats;
    stats.loss_train = detail::subset_loss(model, dataset, train_idx);
    stats.loss_val = n_val > 0 ? detail::subset_loss(model, dataset, val_idx) : 0.0;
    stats.auc_val = n_val > 0 ? detail::validation_auc(model, dataset, val_idx) : 0.5;
    trace.push_back(stats);
  }
  return {model, trace};
}

}  // namespace multinst::train

#pragma once

// Training loop, AdamW, zero-shot retrieval evaluation and embedding statistics.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hyfi/dataset.hpp"
#include "hyfi/model.hpp"

namespace hyfi::trainer {

using model::HyfiParams;
using synth::PairedDataset;

struct TrainConfig {
  double lr = 3e-4;
  double weight_decay = 1e-4;
  std::size_t batch_size = 64;
  std::size_t epochs = 50;
  /// Seeds the shuffling stream only; initialization and data have their own seeds.
  std::uint64_t seed = 0;
  model::LossMode loss_mode = model::LossMode::kStandard;
  model::Ablation ablation = model::Ablation::kFull;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
};

/// One AdamW update: params *= 1 - lr * wd, then the bias-corrected Adam step.
void optimizer_step(grad::ParamVector& params, const grad::ParamVector& grads, AdamState& state,
                    const TrainConfig& config);

struct TrainResult {
  HyfiParams params;
  std::vector<double> history;  // mean batch loss per epoch
};

/// Trains with the loss mode and ablation of `config` (copied into the returned
/// params' model config). The last incomplete batch of each epoch is dropped.
TrainResult train(const PairedDataset& dataset, HyfiParams params, const TrainConfig& config);

std::string history_to_csv(std::span<const double> history);

struct RetrievalReport {
  double top1 = 0.0;
  double top5 = 0.0;
  std::size_t n_ways = 0;
  std::vector<std::size_t> per_item_ranks;  // 1-based; ties count against the query
  std::vector<std::pair<std::size_t, double>> top_k;

  std::string to_json() const;
  std::string ranks_to_csv() const;
};

/// Ranks columns for every row of a row-major n x n similarity matrix (row i's
/// positive is column i).
RetrievalReport rank_retrieval(std::span<const double> similarity, std::size_t n,
                               std::span<const std::size_t> k_list);

/// Zero-shot retrieval: each brain embedding ranks all visual embeddings of the
/// test set. Items must be aligned (item i's brain pairs with item i's image).
RetrievalReport evaluate_retrieval(const PairedDataset& test, const HyfiParams& params,
                                   std::span<const std::size_t> k_list);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;

  static Histogram build(std::span<const double> values, double lo, double hi, std::size_t bins);
  std::size_t total() const;
  std::string to_csv() const;
};

struct RootDistanceStats {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
  Histogram histogram;

  std::string to_json() const;
};

/// Distances d_L(O, z) from the time origin.
RootDistanceStats root_distance_stats(std::span<const hygeo::LorentzPoint> points,
                                      hygeo::Curvature kappa, std::size_t bins = 20);
/// Euclidean distances from the mean embedding.
RootDistanceStats root_distance_stats(const std::vector<std::vector<double>>& vectors,
                                      std::size_t bins = 20);

struct CoefficientStats {
  std::vector<double> t;
  Histogram histogram;
  std::size_t argmin = 0;
  std::size_t argmax = 0;

  std::string to_json() const;
};

CoefficientStats coefficient_stats(const PairedDataset& dataset, const HyfiParams& params,
                                   std::size_t bins = 20);

}  // namespace hyfi::trainer

#include "hyfi/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hyfi::trainer {

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight decay must be >= 0");
  if (batch_size < 2) throw std::invalid_argument("batch size must be at least 2");
}

void optimizer_step(grad::ParamVector& params, const grad::ParamVector& grads, AdamState& state,
                    const TrainConfig& config) {
  auto p = params.flat();
  const auto g = grads.flat();
  if (g.size() != p.size()) {
    throw std::invalid_argument("gradient has " + std::to_string(g.size()) +
                                " entries, parameters have " + std::to_string(p.size()));
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) {
      throw std::runtime_error("non-finite gradient at parameter index " + std::to_string(i));
    }
  }
  if (state.m.empty()) {
    state.m.assign(p.size(), 0.0);
    state.v.assign(p.size(), 0.0);
  }
  ++state.step;
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  const double decay = 1.0 - config.lr * config.weight_decay;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] *= decay;
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g[i];
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g[i] * g[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    p[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

TrainResult train(const PairedDataset& dataset, HyfiParams params, const TrainConfig& config) {
  config.validate();
  params.config.loss_mode = config.loss_mode;
  params.config.ablation = config.ablation;
  TrainResult result{std::move(params), {}};
  if (config.epochs == 0) return result;
  if (dataset.size() < 2) throw std::invalid_argument("training set needs at least 2 items");

  const std::size_t batch = std::min(config.batch_size, dataset.size());
  const std::size_t n_batches = dataset.size() / batch;
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(config.seed);
  AdamState state;
  grad::Tape tape;
  std::vector<synth::PairedItem> items(batch);
  const auto& model_config = result.params.config;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) {
      for (std::size_t i = 0; i < batch; ++i) items[i] = dataset.items[order[b * batch + i]];
      auto vg = grad::value_and_grad(
          [&](grad::Tape& tape, const grad::ParamVars& vars) {
            return model::record_total_loss(tape, vars, items, model_config);
          },
          result.params.values, tape);
      optimizer_step(result.params.values, vg.grad, state, config);
      epoch_loss += vg.value;
    }
    result.history.push_back(epoch_loss / static_cast<double>(n_batches));
  }
  return result;
}

std::string history_to_csv(std::span<const double> history) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) out << i + 1 << "," << history[i] << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------

std::string RetrievalReport::to_json() const {
  nlohmann::json j;
  j["top1"] = top1;
  j["top5"] = top5;
  j["n_ways"] = n_ways;
  for (const auto& [k, acc] : top_k) j["top_k"][std::to_string(k)] = acc;
  j["per_item_ranks"] = per_item_ranks;
  return j.dump(2);
}

std::string RetrievalReport::ranks_to_csv() const {
  std::ostringstream out;
  out << "item,rank\n";
  for (std::size_t i = 0; i < per_item_ranks.size(); ++i) {
    out << i << "," << per_item_ranks[i] << "\n";
  }
  return out.str();
}

RetrievalReport rank_retrieval(std::span<const double> similarity, std::size_t n,
                               std::span<const std::size_t> k_list) {
  if (similarity.size() != n * n) throw std::invalid_argument("similarity matrix is not n x n");
  if (n < 2) throw std::invalid_argument("retrieval needs at least 2 candidates");
  for (auto k : k_list) {
    if (k == 0 || k >= n) {
      throw std::invalid_argument("top-" + std::to_string(k) + " is undefined for " +
                                  std::to_string(n) + "-way retrieval");
    }
  }
  RetrievalReport report;
  report.n_ways = n;
  report.per_item_ranks.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double own = similarity[i * n + i];
    std::size_t rank = 1;
    for (std::size_t k = 0; k < n; ++k) {
      if (k != i && similarity[i * n + k] >= own) ++rank;
    }
    report.per_item_ranks[i] = rank;
  }
  auto hit_rate = [&](std::size_t k) {
    const auto hits = std::count_if(report.per_item_ranks.begin(), report.per_item_ranks.end(),
                                    [k](std::size_t r) { return r <= k; });
    return static_cast<double>(hits) / static_cast<double>(n);
  };
  report.top1 = hit_rate(1);
  report.top5 = hit_rate(5);
  for (auto k : k_list) report.top_k.emplace_back(k, hit_rate(k));
  return report;
}

RetrievalReport evaluate_retrieval(const PairedDataset& test, const HyfiParams& params,
                                   std::span<const std::size_t> k_list) {
  const auto visual = model::embed_visual(test.items, params);
  const auto brain = model::embed_brain(test.items, params);
  return rank_retrieval(model::similarity_matrix(brain, visual, params), test.size(), k_list);
}

// ---------------------------------------------------------------------------

Histogram Histogram::build(std::span<const double> values, double lo, double hi,
                           std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
  Histogram h{lo, hi, std::vector<std::size_t>(bins, 0)};
  const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  for (double v : values) {
    auto b = static_cast<long>(std::floor((v - lo) / width));
    b = std::clamp<long>(b, 0, static_cast<long>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

std::size_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

std::string Histogram::to_csv() const {
  std::ostringstream out;
  out.precision(10);
  out << "bin_lo,bin_hi,count\n";
  const double width = (hi - lo) / static_cast<double>(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out << lo + width * static_cast<double>(i) << "," << lo + width * static_cast<double>(i + 1)
        << "," << counts[i] << "\n";
  }
  return out.str();
}

namespace {

RootDistanceStats summarize(const std::vector<double>& dist, std::size_t bins) {
  if (dist.empty()) throw std::invalid_argument("statistics need at least one embedding");
  RootDistanceStats s;
  s.count = dist.size();
  s.mean = std::accumulate(dist.begin(), dist.end(), 0.0) / static_cast<double>(dist.size());
  double var = 0.0;
  for (double x : dist) var += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(var / static_cast<double>(dist.size()));
  const double hi = *std::max_element(dist.begin(), dist.end());
  s.histogram = Histogram::build(dist, 0.0, hi > 0.0 ? hi : 1.0, bins);
  return s;
}

nlohmann::json histogram_json(const Histogram& h) {
  return nlohmann::json{{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}};
}

}  // namespace

std::string RootDistanceStats::to_json() const {
  nlohmann::json j{{"mean", mean}, {"std", std}, {"count", count},
                   {"histogram", histogram_json(histogram)}};
  return j.dump(2);
}

RootDistanceStats root_distance_stats(std::span<const hygeo::LorentzPoint> points,
                                      hygeo::Curvature kappa, std::size_t bins) {
  std::vector<double> dist;
  dist.reserve(points.size());
  for (const auto& p : points) {
    dist.push_back(hygeo::geodesic_distance(hygeo::LorentzPoint::origin(p.dim(), kappa), p, kappa));
  }
  return summarize(dist, bins);
}

RootDistanceStats root_distance_stats(const std::vector<std::vector<double>>& vectors,
                                      std::size_t bins) {
  if (vectors.empty()) throw std::invalid_argument("statistics need at least one embedding");
  // Flat space has no distinguished point; the root is the mean embedding.
  std::vector<double> mean(vectors.front().size(), 0.0);
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i] / static_cast<double>(vectors.size());
  }
  std::vector<double> dist;
  dist.reserve(vectors.size());
  for (const auto& v : vectors) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += (v[i] - mean[i]) * (v[i] - mean[i]);
    dist.push_back(std::sqrt(s));
  }
  return summarize(dist, bins);
}

std::string CoefficientStats::to_json() const {
  nlohmann::json j{{"count", t.size()},
                   {"argmin", argmin},
                   {"argmax", argmax},
                   {"min", t.empty() ? 0.0 : t[argmin]},
                   {"max", t.empty() ? 0.0 : t[argmax]},
                   {"histogram", histogram_json(histogram)}};
  return j.dump(2);
}

CoefficientStats coefficient_stats(const PairedDataset& dataset, const HyfiParams& params,
                                   std::size_t bins) {
  if (dataset.empty()) throw std::invalid_argument("coefficient statistics need items");
  CoefficientStats s;
  s.t.reserve(dataset.size());
  for (const auto& item : dataset.items) {
    model::check_item_dims(item, params.config);
    s.t.push_back(model::coefficient(item, params));
  }
  s.argmin = static_cast<std::size_t>(std::min_element(s.t.begin(), s.t.end()) - s.t.begin());
  s.argmax = static_cast<std::size_t>(std::max_element(s.t.begin(), s.t.end()) - s.t.begin());
  s.histogram = Histogram::build(s.t, 0.0, 1.0, bins);
  return s;
}

}  // namespace hyfi::trainer

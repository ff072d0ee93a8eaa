#include "hyfi/synth.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace hyfi::synth {

namespace {

// Separate streams so the mixing matrix does not depend on the dataset size.
constexpr std::uint64_t kProjectionStream = 0x9e3779b97f4a7c15ULL;

std::vector<double> gaussian_vector(std::mt19937_64& rng, std::size_t n, double std) {
  std::normal_distribution<double> dist(0.0, std);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_concepts < 2) throw std::invalid_argument("need at least 2 training concepts");
  if (n_test_concepts < 2) throw std::invalid_argument("need at least 2 test concepts");
  if (images_per_concept < 1) throw std::invalid_argument("need at least 1 image per concept");
  if (d == 0 || d_b == 0) throw std::invalid_argument("dimensions must be positive");
  if (d_b >= d) {
    throw std::invalid_argument("brain dimension d_b=" + std::to_string(d_b) +
                                " must be smaller than the feature dimension d=" +
                                std::to_string(d));
  }
  if (!(semantic_scale > 0.0) || !(perceptual_scale > 0.0)) {
    throw std::invalid_argument("feature scales must be positive");
  }
  if (!(entangle_weight >= 0.0 && entangle_weight <= 1.0)) {
    throw std::invalid_argument("entangle_weight must lie in [0,1]");
  }
  if (!(brain_noise_std >= 0.0)) throw std::invalid_argument("brain_noise_std must be >= 0");
}

std::vector<double> brain_projection(const SynthConfig& config) {
  std::mt19937_64 rng(config.seed ^ kProjectionStream);
  return gaussian_vector(rng, config.d_b * config.d, 1.0 / std::sqrt(static_cast<double>(config.d)));
}

Split generate(const SynthConfig& config) {
  config.validate();
  const auto projection = brain_projection(config);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  const std::size_t n_total = config.n_concepts + config.n_test_concepts;
  const double root_d = std::sqrt(static_cast<double>(config.d));
  std::vector<std::vector<double>> prototypes;
  prototypes.reserve(n_total);
  for (std::size_t c = 0; c < n_total; ++c) {
    prototypes.push_back(gaussian_vector(rng, config.d, config.semantic_scale / root_d));
  }

  const double jitter = 0.1 * config.semantic_scale / root_d;
  const double w = config.entangle_weight;
  auto make_item = [&](std::uint32_t concept_id) {
    PairedItem item;
    item.concept_id = concept_id;
    const auto& proto = prototypes[concept_id];
    item.semantic.resize(config.d);
    item.perceptual.resize(config.d);
    for (std::size_t i = 0; i < config.d; ++i) {
      item.semantic[i] = proto[i] + jitter * unit(rng);
      item.perceptual[i] = proto[i] + config.perceptual_scale / root_d * unit(rng);
    }
    item.brain.resize(config.d_b);
    for (std::size_t r = 0; r < config.d_b; ++r) {
      double s = 0.0;
      for (std::size_t i = 0; i < config.d; ++i) {
        s += projection[r * config.d + i] * (w * item.semantic[i] + (1.0 - w) * item.perceptual[i]);
      }
      item.brain[r] = s + config.brain_noise_std * unit(rng);
    }
    return item;
  };

  Split split;
  for (auto* ds : {&split.train, &split.test}) {
    ds->d_semantic = config.d;
    ds->d_perceptual = config.d;
    ds->d_brain = config.d_b;
  }
  split.train.items.reserve(config.n_concepts * config.images_per_concept);
  for (std::size_t c = 0; c < config.n_concepts; ++c) {
    for (std::size_t k = 0; k < config.images_per_concept; ++k) {
      split.train.items.push_back(make_item(static_cast<std::uint32_t>(c)));
    }
  }
  for (std::size_t c = config.n_concepts; c < n_total; ++c) {
    split.test.items.push_back(make_item(static_cast<std::uint32_t>(c)));
  }
  return split;
}

std::string config_to_json(const SynthConfig& c) {
  nlohmann::json j;
  j["n_concepts"] = c.n_concepts;
  j["n_test_concepts"] = c.n_test_concepts;
  j["images_per_concept"] = c.images_per_concept;
  j["d"] = c.d;
  j["d_b"] = c.d_b;
  j["semantic_scale"] = c.semantic_scale;
  j["perceptual_scale"] = c.perceptual_scale;
  j["entangle_weight"] = c.entangle_weight;
  j["brain_noise_std"] = c.brain_noise_std;
  j["seed"] = c.seed;
  return j.dump(2);
}

SynthConfig config_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  SynthConfig c;
  c.n_concepts = j.value("n_concepts", c.n_concepts);
  c.n_test_concepts = j.value("n_test_concepts", c.n_test_concepts);
  c.images_per_concept = j.value("images_per_concept", c.images_per_concept);
  c.d = j.value("d", c.d);
  c.d_b = j.value("d_b", c.d_b);
  c.semantic_scale = j.value("semantic_scale", c.semantic_scale);
  c.perceptual_scale = j.value("perceptual_scale", c.perceptual_scale);
  c.entangle_weight = j.value("entangle_weight", c.entangle_weight);
  c.brain_noise_std = j.value("brain_noise_std", c.brain_noise_std);
  c.seed = j.value("seed", c.seed);
  return c;
}

}  // namespace hyfi::synth

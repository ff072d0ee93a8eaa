#pragma once

// Synthetic paired brain/vision data, image blur augmentations and the "HYFI"
// embedding file format.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hyfi/dataset.hpp"

namespace hyfi::synth {

struct SynthConfig {
  std::size_t n_concepts = 200;       // training concepts
  std::size_t n_test_concepts = 50;   // held-out concepts, one item each
  std::size_t images_per_concept = 5;
  std::size_t d = 32;
  std::size_t d_b = 12;
  double semantic_scale = 16.0;
  double perceptual_scale = 24.0;
  double entangle_weight = 0.25;
  double brain_noise_std = 0.5;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
  bool operator==(const SynthConfig&) const = default;
};

struct Split {
  PairedDataset train;
  PairedDataset test;
};

Split generate(const SynthConfig& config);

/// The fixed d_b x d mixing matrix used for the brain signals of `config`.
std::vector<double> brain_projection(const SynthConfig& config);

std::string config_to_json(const SynthConfig& config);
SynthConfig config_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// Images

struct ImageGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;  // row-major

  ImageGrid() = default;
  ImageGrid(std::size_t h, std::size_t w, double fill = 0.0);

  double& at(std::size_t i, std::size_t j) { return pixels[i * width + j]; }
  double at(std::size_t i, std::size_t j) const { return pixels[i * width + j]; }
};

// Best fovea-blur settings from the original grid search: perceptual radius 31,
// semantic radius 51, decay 3.
inline constexpr std::size_t kPerceptualRadius = 31;
inline constexpr std::size_t kSemanticRadius = 51;
inline constexpr double kFoveaLambda = 3.0;

/// Sigma used when only the kernel size is given: the kernel spans +-3 sigma.
double default_sigma(std::size_t radius);

/// Normalized sampled Gaussian of size `radius` x `radius` (radius = 2k + 1), row-major.
std::vector<double> gaussian_kernel(double sigma, std::size_t radius);

/// Convolution with the normalized Gaussian kernel; borders replicate edge pixels.
ImageGrid gaussian_blur(const ImageGrid& img, double sigma, std::size_t radius);

struct Pixel {
  std::size_t row;
  std::size_t col;
};

/// delta * img + (1 - delta) * blur with delta = exp(-lambda * dist(center) / L), L the
/// image diagonal.
ImageGrid fovea_blur(const ImageGrid& img, double lambda, double sigma, std::size_t radius,
                     Pixel center);

// ---------------------------------------------------------------------------
// HYFI binary format: "HYFI", u32 version = 1, u32 N, u32 d_s, u32 d_p, u32 d_b, then
// per item u32 concept_id and the semantic, perceptual and brain vectors as
// little-endian float64.

std::string encode_embeddings(const PairedDataset& dataset);
PairedDataset decode_embeddings(std::string_view bytes);
void write_embeddings(const std::filesystem::path& path, const PairedDataset& dataset);
PairedDataset read_embeddings(const std::filesystem::path& path);

}  // namespace hyfi::synth

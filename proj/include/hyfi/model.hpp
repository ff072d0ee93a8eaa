#pragma once

// The brain/vision alignment model: linear encoders, origin lifts with learnable
// scales, geodesic fusion of semantic and perceptual features, and the
// symmetric hyperbolic contrastive objective.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hyfi/dataset.hpp"
#include "hyfi/grad.hpp"
#include "hyfi/hygeo.hpp"

namespace hyfi::model {

using hygeo::Curvature;
using hygeo::LorentzPoint;
using synth::PairedItem;

enum class LossMode { kStandard, kPaperLiteral };

/// Rows of the interpolation / geometry ablation.
enum class Ablation {
  kFull,             // geodesic interpolation in hyperbolic space
  kNoInterp,         // semantic embedding only
  kEuclideanInterp,  // linear interpolation of tangent vectors, then lift
  kEuclideanSpace,   // cosine alignment of semantic features, no hyperbolic lift
};

/// Which feature drives the interpolation coefficient.
enum class CoefficientInput { kSemantic, kPerceptual, kOriginal, kBrain };

std::string_view to_string(LossMode m);
std::string_view to_string(Ablation a);
std::string_view to_string(CoefficientInput c);
LossMode parse_loss_mode(std::string_view s);
Ablation parse_ablation(std::string_view s);
CoefficientInput parse_coefficient_input(std::string_view s);

struct ModelConfig {
  std::size_t d = 32;
  std::size_t d_b = 12;
  LossMode loss_mode = LossMode::kStandard;
  Ablation ablation = Ablation::kFull;
  CoefficientInput t_input = CoefficientInput::kSemantic;
  /// Pin the visual lift scale to 1 instead of learning it.
  bool fix_alpha_v = false;
  /// Overrides the learned interpolation coefficient when set.
  std::optional<double> forced_t;

  bool operator==(const ModelConfig&) const = default;
};

/// Slices: w_s (d x d), w_p (d x d), w_t, t_bias, brain_w (d x d_b), brain_b (d),
/// alpha_v, alpha_b, log_tau, log_kappa. Matrices are row-major.
grad::ParamLayout make_layout(const ModelConfig& config);

struct HyfiParams {
  ModelConfig config;
  grad::ParamVector values;

  /// W_s, W_p = I + N(0, 0.01^2); w_t = 0, bias 0; brain encoder U(+-1/sqrt(d_b));
  /// alpha = sqrt(1/d); tau = 0.07; kappa = 1.
  static HyfiParams init(const ModelConfig& config, std::uint64_t seed);

  double alpha_v() const;
  double alpha_b() const;
  double tau() const;
  double kappa() const;
  Curvature curvature() const { return Curvature(kappa()); }
};

struct VisualParts {
  LorentzPoint semantic;
  LorentzPoint perceptual;
  LorentzPoint interpolated;
  double t;
};

/// Full-model pieces for one item: z_v^s, z_v^p, the coefficient and the fused point.
VisualParts visual_parts(const PairedItem& item, const HyfiParams& params);
/// Fused visual embedding of the full model (t from the semantic feature).
LorentzPoint encode_visual_pair(std::span<const double> x_s, std::span<const double> x_p,
                                const HyfiParams& params);
LorentzPoint encode_brain(std::span<const double> x_b, const HyfiParams& params);
/// Interpolation coefficient for an item, honoring config.t_input / forced_t.
double coefficient(const PairedItem& item, const HyfiParams& params);

struct EmbeddingBatch {
  std::vector<LorentzPoint> points;
  std::vector<std::uint32_t> ids;
};

/// Mean over rows i of -log softmax_i(sim(i, .) / tau)[i]. `sim` is row-major B x B;
/// paper_literal mode drops k = i from the denominator.
double info_nce(std::span<const double> sim, std::size_t batch, double tau, LossMode mode);

/// L(z_v, z_b) with similarity -d_L.
double contrastive_loss(const EmbeddingBatch& z_v, const EmbeddingBatch& z_b, double tau,
                        Curvature kappa, LossMode mode);

/// Embeddings of either geometry, depending on the ablation.
struct Embedded {
  bool hyperbolic = true;
  std::vector<LorentzPoint> points;
  std::vector<std::vector<double>> vectors;

  std::size_t size() const { return hyperbolic ? points.size() : vectors.size(); }
};

Embedded embed_visual(std::span<const PairedItem> items, const HyfiParams& params);
Embedded embed_brain(std::span<const PairedItem> items, const HyfiParams& params);
/// Row-major rows.size() x cols.size(): -d_L, or cosine similarity in euclidean_space.
std::vector<double> similarity_matrix(const Embedded& rows, const Embedded& cols,
                                      const HyfiParams& params);

/// L(z_v, z_b) + L(z_b, z_v) on a batch.
double total_loss(std::span<const PairedItem> batch, const HyfiParams& params);

/// Same objective recorded on a tape, with parameters taken from `vars`.
grad::Var record_total_loss(grad::Tape& tape, const grad::ParamVars& vars,
                            std::span<const PairedItem> batch, const ModelConfig& config);

/// Throws hygeo::DimensionError naming both sizes when an item does not match.
void check_item_dims(const PairedItem& item, const ModelConfig& config);

// Checkpoints: `<stem>.manifest` (key = value text) plus `<stem>.bin` holding the
// flat parameter vector as little-endian float64.
void save_checkpoint(const std::filesystem::path& stem, const HyfiParams& params);
HyfiParams load_checkpoint(const std::filesystem::path& stem);

}  // namespace hyfi::model

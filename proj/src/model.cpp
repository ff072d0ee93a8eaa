#include "hyfi/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "hyfi/grad_geometry.hpp"
#include "hyfi/interp.hpp"

namespace hyfi::model {

namespace {

using grad::Var;

std::vector<double> matvec(std::span<const double> w, std::size_t rows,
                           std::span<const double> x) {
  const std::size_t cols = x.size();
  std::vector<double> out(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += w[i * cols + j] * x[j];
    out[i] = s;
  }
  return out;
}

std::vector<double> original_feature(const PairedItem& item) {
  std::vector<double> out(item.semantic.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 0.5 * (item.semantic[i] + item.perceptual[i]);
  }
  return out;
}

std::size_t coefficient_dim(const ModelConfig& c) {
  return c.t_input == CoefficientInput::kBrain ? c.d_b : c.d;
}

void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw hygeo::DimensionError(std::string(what) + " has dimension " + std::to_string(got) +
                                " but the model expects " + std::to_string(want));
  }
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

std::vector<double> brain_features(std::span<const double> x_b, const HyfiParams& params) {
  const auto& c = params.config;
  auto out = matvec(params.values["brain_w"], c.d, x_b);
  const auto bias = params.values["brain_b"];
  for (std::size_t i = 0; i < c.d; ++i) out[i] += bias[i];
  return out;
}

// ---------------------------------------------------------------------------
// Tape helpers

std::vector<Var> var_matvec(grad::Tape& tape, std::span<const Var> w, std::size_t rows,
                            std::span<const double> x) {
  const std::size_t cols = x.size();
  std::vector<Var> out;
  out.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) out.push_back(tape.dot(w.subspan(i * cols, cols), x));
  return out;
}

std::vector<Var> var_scaled(std::span<const Var> v, Var s) {
  std::vector<Var> out;
  out.reserve(v.size());
  for (auto x : v) out.push_back(s * x);
  return out;
}

Var var_coefficient(grad::Tape& tape, const grad::ParamVars& vars, const PairedItem& item,
                    const ModelConfig& c) {
  if (c.forced_t) return tape.leaf(*c.forced_t);
  const auto w_t = vars["w_t"];
  Var z;
  switch (c.t_input) {
    case CoefficientInput::kSemantic:
      z = tape.dot(w_t, item.semantic);
      break;
    case CoefficientInput::kPerceptual:
      z = tape.dot(w_t, item.perceptual);
      break;
    case CoefficientInput::kOriginal:
      z = tape.dot(w_t, original_feature(item));
      break;
    case CoefficientInput::kBrain:
      z = tape.dot(w_t, item.brain);
      break;
  }
  return grad::sigmoid(z + vars.scalar("t_bias"));
}

// Mean InfoNCE with rows of `sim` (accessed through `at`) as anchors.
template <class At>
Var var_info_nce(grad::Tape& tape, std::size_t batch, Var inv_tau, LossMode mode, At at) {
  std::vector<Var> row_losses;
  row_losses.reserve(batch);
  std::vector<Var> logits;
  for (std::size_t i = 0; i < batch; ++i) {
    logits.clear();
    Var positive;
    for (std::size_t k = 0; k < batch; ++k) {
      Var z = at(i, k) * inv_tau;
      if (k == i) positive = z;
      if (k != i || mode == LossMode::kStandard) logits.push_back(z);
    }
    row_losses.push_back(tape.logsumexp(logits) - positive);
  }
  return tape.sum(row_losses) / static_cast<double>(batch);
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(LossMode m) {
  return m == LossMode::kStandard ? "standard" : "paper_literal";
}

std::string_view to_string(Ablation a) {
  switch (a) {
    case Ablation::kFull:
      return "full";
    case Ablation::kNoInterp:
      return "no_interp";
    case Ablation::kEuclideanInterp:
      return "euclidean_interp";
    case Ablation::kEuclideanSpace:
      return "euclidean_space";
  }
  return "full";
}

std::string_view to_string(CoefficientInput c) {
  switch (c) {
    case CoefficientInput::kSemantic:
      return "semantic";
    case CoefficientInput::kPerceptual:
      return "perceptual";
    case CoefficientInput::kOriginal:
      return "original";
    case CoefficientInput::kBrain:
      return "brain";
  }
  return "semantic";
}

LossMode parse_loss_mode(std::string_view s) {
  if (s == "standard") return LossMode::kStandard;
  if (s == "paper_literal") return LossMode::kPaperLiteral;
  throw std::invalid_argument("unknown loss mode '" + std::string(s) +
                              "' (expected standard or paper_literal)");
}

Ablation parse_ablation(std::string_view s) {
  for (auto a : {Ablation::kFull, Ablation::kNoInterp, Ablation::kEuclideanInterp,
                 Ablation::kEuclideanSpace}) {
    if (s == to_string(a)) return a;
  }
  throw std::invalid_argument("unknown ablation '" + std::string(s) +
                              "' (expected full, no_interp, euclidean_interp or euclidean_space)");
}

CoefficientInput parse_coefficient_input(std::string_view s) {
  for (auto c : {CoefficientInput::kSemantic, CoefficientInput::kPerceptual,
                 CoefficientInput::kOriginal, CoefficientInput::kBrain}) {
    if (s == to_string(c)) return c;
  }
  throw std::invalid_argument("unknown coefficient input '" + std::string(s) + "'");
}

grad::ParamLayout make_layout(const ModelConfig& c) {
  if (c.d == 0 || c.d_b == 0) throw std::invalid_argument("model dimensions must be positive");
  grad::ParamLayout layout;
  layout.add("w_s", c.d, c.d)
      .add("w_p", c.d, c.d)
      .add("w_t", coefficient_dim(c))
      .add("t_bias", 1)
      .add("brain_w", c.d, c.d_b)
      .add("brain_b", c.d)
      .add("alpha_v", 1)
      .add("alpha_b", 1)
      .add("log_tau", 1)
      .add("log_kappa", 1);
  return layout;
}

HyfiParams HyfiParams::init(const ModelConfig& config, std::uint64_t seed) {
  HyfiParams p{config, grad::ParamVector(make_layout(config))};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (const char* name : {"w_s", "w_p"}) {
    auto w = p.values[name];
    for (std::size_t i = 0; i < config.d; ++i) {
      for (std::size_t j = 0; j < config.d; ++j) {
        w[i * config.d + j] = (i == j ? 1.0 : 0.0) + noise(rng);
      }
    }
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.d_b));
  std::uniform_real_distribution<double> uniform(-bound, bound);
  for (auto& w : p.values["brain_w"]) w = uniform(rng);
  const double alpha = std::sqrt(1.0 / static_cast<double>(config.d));
  p.values.scalar("alpha_v") = config.fix_alpha_v ? 1.0 : alpha;
  p.values.scalar("alpha_b") = alpha;
  p.values.scalar("log_tau") = std::log(0.07);
  p.values.scalar("log_kappa") = 0.0;
  return p;
}

double HyfiParams::alpha_v() const { return config.fix_alpha_v ? 1.0 : values.scalar("alpha_v"); }
double HyfiParams::alpha_b() const { return values.scalar("alpha_b"); }
double HyfiParams::tau() const { return std::exp(values.scalar("log_tau")); }
double HyfiParams::kappa() const { return std::exp(values.scalar("log_kappa")); }

void check_item_dims(const PairedItem& item, const ModelConfig& c) {
  require_dim(item.semantic.size(), c.d, "semantic feature");
  require_dim(item.perceptual.size(), c.d, "perceptual feature");
  require_dim(item.brain.size(), c.d_b, "brain signal");
}

double coefficient(const PairedItem& item, const HyfiParams& params) {
  const auto& c = params.config;
  if (c.forced_t) return *c.forced_t;
  const auto w_t = params.values["w_t"];
  const double bias = params.values.scalar("t_bias");
  switch (c.t_input) {
    case CoefficientInput::kSemantic:
      return interp::interpolation_coefficient(item.semantic, w_t, bias);
    case CoefficientInput::kPerceptual:
      return interp::interpolation_coefficient(item.perceptual, w_t, bias);
    case CoefficientInput::kOriginal:
      return interp::interpolation_coefficient(original_feature(item), w_t, bias);
    case CoefficientInput::kBrain:
      return interp::interpolation_coefficient(item.brain, w_t, bias);
  }
  return 0.5;
}

VisualParts visual_parts(const PairedItem& item, const HyfiParams& params) {
  check_item_dims(item, params.config);
  const auto& c = params.config;
  const auto kappa = params.curvature();
  const double alpha = params.alpha_v();
  auto u_s = matvec(params.values["w_s"], c.d, item.semantic);
  auto u_p = matvec(params.values["w_p"], c.d, item.perceptual);
  for (auto& x : u_s) x *= alpha;
  for (auto& x : u_p) x *= alpha;
  auto z_s = hygeo::exp_map_origin(u_s, kappa);
  auto z_p = hygeo::exp_map_origin(u_p, kappa);
  const double t = coefficient(item, params);
  auto fused = interp::geodesic_interpolate(z_s, z_p, t, kappa);
  return VisualParts{std::move(z_s), std::move(z_p), std::move(fused), t};
}

LorentzPoint encode_visual_pair(std::span<const double> x_s, std::span<const double> x_p,
                                const HyfiParams& params) {
  require_dim(x_s.size(), params.config.d, "semantic feature");
  require_dim(x_p.size(), params.config.d, "perceptual feature");
  PairedItem item;
  item.semantic.assign(x_s.begin(), x_s.end());
  item.perceptual.assign(x_p.begin(), x_p.end());
  item.brain.assign(params.config.d_b, 0.0);
  if (params.config.t_input == CoefficientInput::kBrain && !params.config.forced_t) {
    throw std::invalid_argument("encode_visual_pair: brain-driven coefficient needs the item");
  }
  return visual_parts(item, params).interpolated;
}

LorentzPoint encode_brain(std::span<const double> x_b, const HyfiParams& params) {
  require_dim(x_b.size(), params.config.d_b, "brain signal");
  auto u = brain_features(x_b, params);
  const double alpha = params.alpha_b();
  for (auto& x : u) x *= alpha;
  return hygeo::exp_map_origin(u, params.curvature());
}

double info_nce(std::span<const double> sim, std::size_t batch, double tau, LossMode mode) {
  if (batch < 2) throw std::invalid_argument("contrastive loss needs a batch of at least 2");
  if (sim.size() != batch * batch) throw std::invalid_argument("similarity matrix is not B x B");
  if (!(tau > 0.0)) throw std::invalid_argument("temperature must be positive");
  double total = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    double m = -INFINITY;
    for (std::size_t k = 0; k < batch; ++k) {
      if (k != i || mode == LossMode::kStandard) m = std::max(m, sim[i * batch + k] / tau);
    }
    double s = 0.0;
    for (std::size_t k = 0; k < batch; ++k) {
      if (k != i || mode == LossMode::kStandard) s += std::exp(sim[i * batch + k] / tau - m);
    }
    total += m + std::log(s) - sim[i * batch + i] / tau;
  }
  return total / static_cast<double>(batch);
}

double contrastive_loss(const EmbeddingBatch& z_v, const EmbeddingBatch& z_b, double tau,
                        Curvature kappa, LossMode mode) {
  const std::size_t n = z_v.points.size();
  if (z_b.points.size() != n) throw std::invalid_argument("contrastive loss: batches differ in size");
  if (n < 2) throw std::invalid_argument("contrastive loss needs a batch of at least 2");
  std::vector<double> sim(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      sim[i * n + k] = -hygeo::geodesic_distance(z_v.points[i], z_b.points[k], kappa);
    }
  }
  return info_nce(sim, n, tau, mode);
}

Embedded embed_visual(std::span<const PairedItem> items, const HyfiParams& params) {
  const auto& c = params.config;
  Embedded out;
  out.hyperbolic = c.ablation != Ablation::kEuclideanSpace;
  const auto kappa = params.curvature();
  for (const auto& item : items) {
    check_item_dims(item, c);
    switch (c.ablation) {
      case Ablation::kFull:
        out.points.push_back(visual_parts(item, params).interpolated);
        break;
      case Ablation::kNoInterp: {
        auto u = matvec(params.values["w_s"], c.d, item.semantic);
        for (auto& x : u) x *= params.alpha_v();
        out.points.push_back(hygeo::exp_map_origin(u, kappa));
        break;
      }
      case Ablation::kEuclideanInterp: {
        const double t = coefficient(item, params);
        const auto u_s = matvec(params.values["w_s"], c.d, item.semantic);
        const auto u_p = matvec(params.values["w_p"], c.d, item.perceptual);
        std::vector<double> u(c.d);
        for (std::size_t i = 0; i < c.d; ++i) {
          u[i] = params.alpha_v() * ((1.0 - t) * u_s[i] + t * u_p[i]);
        }
        out.points.push_back(hygeo::exp_map_origin(u, kappa));
        break;
      }
      case Ablation::kEuclideanSpace:
        out.vectors.push_back(matvec(params.values["w_s"], c.d, item.semantic));
        break;
    }
  }
  return out;
}

Embedded embed_brain(std::span<const PairedItem> items, const HyfiParams& params) {
  Embedded out;
  out.hyperbolic = params.config.ablation != Ablation::kEuclideanSpace;
  for (const auto& item : items) {
    check_item_dims(item, params.config);
    if (out.hyperbolic) {
      out.points.push_back(encode_brain(item.brain, params));
    } else {
      out.vectors.push_back(brain_features(item.brain, params));
    }
  }
  return out;
}

std::vector<double> similarity_matrix(const Embedded& rows, const Embedded& cols,
                                      const HyfiParams& params) {
  if (rows.hyperbolic != cols.hyperbolic) {
    throw std::invalid_argument("similarity_matrix: embeddings live in different spaces");
  }
  const std::size_t n = rows.size();
  const std::size_t m = cols.size();
  std::vector<double> sim(n * m);
  const auto kappa = params.curvature();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      sim[i * m + k] = rows.hyperbolic
                           ? -hygeo::geodesic_distance(rows.points[i], cols.points[k], kappa)
                           : cosine(rows.vectors[i], cols.vectors[k]);
    }
  }
  return sim;
}

double total_loss(std::span<const PairedItem> batch, const HyfiParams& params) {
  const std::size_t n = batch.size();
  if (n < 2) throw std::invalid_argument("total loss needs a batch of at least 2");
  const auto visual = embed_visual(batch, params);
  const auto brain = embed_brain(batch, params);
  const auto sim = similarity_matrix(visual, brain, params);
  std::vector<double> sim_t(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) sim_t[k * n + i] = sim[i * n + k];
  }
  const double tau = params.tau();
  const auto mode = params.config.loss_mode;
  return info_nce(sim, n, tau, mode) + info_nce(sim_t, n, tau, mode);
}

Var record_total_loss(grad::Tape& tape, const grad::ParamVars& vars,
                      std::span<const PairedItem> batch, const ModelConfig& c) {
  const std::size_t n = batch.size();
  if (n < 2) throw std::invalid_argument("total loss needs a batch of at least 2");
  for (const auto& item : batch) check_item_dims(item, c);

  const auto w_s = vars["w_s"];
  const auto w_p = vars["w_p"];
  const auto brain_w = vars["brain_w"];
  const auto brain_b = vars["brain_b"];
  const Var inv_tau = grad::exp(-vars.scalar("log_tau"));

  auto brain_linear = [&](const PairedItem& item) {
    auto u = var_matvec(tape, brain_w, c.d, item.brain);
    for (std::size_t i = 0; i < c.d; ++i) u[i] = u[i] + brain_b[i];
    return u;
  };

  std::vector<Var> sim(n * n);
  if (c.ablation == Ablation::kEuclideanSpace) {
    std::vector<std::vector<Var>> vis(n), brn(n);
    std::vector<Var> vis_inv(n), brn_inv(n);
    for (std::size_t i = 0; i < n; ++i) {
      vis[i] = var_matvec(tape, w_s, c.d, batch[i].semantic);
      brn[i] = brain_linear(batch[i]);
      vis_inv[i] = 1.0 / grad::sqrt(tape.sumsq(vis[i]));
      brn_inv[i] = 1.0 / grad::sqrt(tape.sumsq(brn[i]));
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        sim[i * n + k] = tape.dot(vis[i], brn[k]) * vis_inv[i] * brn_inv[k];
      }
    }
  } else {
    const grad::VarCurvature kappa(grad::exp(vars.scalar("log_kappa")));
    const Var alpha_v = c.fix_alpha_v ? tape.leaf(1.0) : vars.scalar("alpha_v");
    const Var alpha_b = vars.scalar("alpha_b");
    std::vector<grad::VarPoint> vis, brn;
    vis.reserve(n);
    brn.reserve(n);
    for (const auto& item : batch) {
      const auto u_s = var_scaled(var_matvec(tape, w_s, c.d, item.semantic), alpha_v);
      switch (c.ablation) {
        case Ablation::kFull: {
          const auto u_p = var_scaled(var_matvec(tape, w_p, c.d, item.perceptual), alpha_v);
          const Var t = var_coefficient(tape, vars, item, c);
          vis.push_back(grad::geodesic_interpolate(grad::exp_map_origin(u_s, kappa),
                                                   grad::exp_map_origin(u_p, kappa), t, kappa));
          break;
        }
        case Ablation::kNoInterp:
          vis.push_back(grad::exp_map_origin(u_s, kappa));
          break;
        case Ablation::kEuclideanInterp: {
          const auto u_p = var_scaled(var_matvec(tape, w_p, c.d, item.perceptual), alpha_v);
          const Var t = var_coefficient(tape, vars, item, c);
          const Var s = 1.0 - t;
          std::vector<Var> u;
          u.reserve(c.d);
          for (std::size_t i = 0; i < c.d; ++i) u.push_back(s * u_s[i] + t * u_p[i]);
          vis.push_back(grad::exp_map_origin(u, kappa));
          break;
        }
        case Ablation::kEuclideanSpace:
          break;
      }
      brn.push_back(grad::exp_map_origin(var_scaled(brain_linear(item), alpha_b), kappa));
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        sim[i * n + k] = -grad::geodesic_distance(vis[i], brn[k], kappa);
      }
    }
  }

  const Var forward = var_info_nce(tape, n, inv_tau, c.loss_mode,
                                   [&](std::size_t i, std::size_t k) { return sim[i * n + k]; });
  const Var backward = var_info_nce(tape, n, inv_tau, c.loss_mode,
                                    [&](std::size_t i, std::size_t k) { return sim[k * n + i]; });
  return forward + backward;
}

}  // namespace hyfi::model

#include "hyfi/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include "hyfi/hygeo.hpp"
#include "hyfi/interp.hpp"
#include "hyfi/model.hpp"
#include "hyfi/synth.hpp"
#include "hyfi/trainer.hpp"

namespace hyfi::checks {

namespace {

using hygeo::Curvature;
using hygeo::LorentzPoint;

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Tracks failures and the worst error relative to its tolerance.
struct Tally {
  SuiteResult& r;
  void check(double error, double tol) {
    if (!(error < tol)) ++r.failures;
    if (std::isfinite(error)) r.worst = std::max(r.worst, error / tol);
  }
  void require(bool ok) {
    if (!ok) ++r.failures;
  }
};

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n, double std = 1.0) {
  std::normal_distribution<double> d(0.0, std);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

std::vector<double> in_ball(std::mt19937_64& rng, std::size_t n, double radius) {
  auto v = gaussian(rng, n);
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  const double r = std::uniform_real_distribution<double>(0.0, radius)(rng);
  for (auto& x : v) x *= s > 0.0 ? r / s : 0.0;
  return v;
}

SuiteResult named(const char* name) {
  SuiteResult r;
  r.name = name;
  return r;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

std::vector<std::string> suite_names() {
  return {"geometry", "interpolation", "compression", "gradient",
          "model",    "retrieval",     "augmentation", "optimizer"};
}

std::vector<SuiteResult> run(std::string_view name, std::size_t trials, std::uint64_t seed) {
  using Fn = SuiteResult (*)(std::size_t, std::uint64_t);
  const std::pair<std::string_view, Fn> table[] = {
      {"geometry", geometry},   {"interpolation", interpolation}, {"compression", compression},
      {"gradient", gradient},   {"model", model},                 {"retrieval", retrieval},
      {"augmentation", augmentation}, {"optimizer", optimizer},
  };
  std::vector<SuiteResult> out;
  for (const auto& [n, fn] : table) {
    if (name == "all" || name == n) out.push_back(fn(trials, seed));
  }
  if (out.empty()) throw std::invalid_argument("unknown check suite '" + std::string(name) + "'");
  return out;
}

SuiteResult geometry(std::size_t trials, std::uint64_t seed) {
  auto r = named("geometry");
  Timer timer;
  Tally tally{r};
  std::mt19937_64 rng(seed);
  r.cases = trials ? trials : 10000;
  for (std::size_t i = 0; i < r.cases; ++i) {
    const Curvature k(uniform(rng, 0.25, 4.0));
    const std::size_t n = 2 + i % 7;
    const auto p = LorentzPoint::lift(in_ball(rng, n, 10.0), k);
    const auto q = LorentzPoint::lift(in_ball(rng, n, 10.0), k);
    tally.check(std::abs(k.kappa() * hygeo::lorentz_inner(p, p) + 1.0), 1e-9);
    const auto v = hygeo::log_map(p, q, k);
    tally.check(std::abs(hygeo::lorentz_inner(p.ambient(), v.components)), 1e-9);
    const auto back = hygeo::exp_map(v, 1.0, k);
    tally.check(std::abs(k.kappa() * hygeo::lorentz_inner(back, back) + 1.0), 1e-9);
    tally.check(max_abs_diff(back.spatial(), q.spatial()), 1e-7);
    const double d = hygeo::geodesic_distance(p, q, k);
    tally.check(std::abs(d - hygeo::geodesic_distance(q, p, k)), 1e-10);
    tally.check(std::abs(hygeo::tangent_norm(v.components) - d), 1e-7);
  }
  r.seconds = timer.seconds();
  r.note = "constraint 1e-9, tangency 1e-9, round trip 1e-7, symmetry 1e-10";
  return r;
}

SuiteResult interpolation(std::size_t trials, std::uint64_t seed) {
  auto r = named("interpolation");
  Timer timer;
  Tally tally{r};
  std::mt19937_64 rng(seed);
  r.cases = trials ? trials : 10000;
  for (std::size_t i = 0; i < r.cases; ++i) {
    const double t = uniform(rng, 0.0, 1.0);
    const double beta = uniform(rng, 0.0, 10.0);
    if (t <= 0.0 || beta <= 0.0) continue;
    const auto c = interp::sinh_coefficients(t, beta);
    tally.require(c.a < 1.0 - t && c.b < t && c.a + c.b < 1.0);
    const auto lim = interp::sinh_coefficients(t, 1e-9);
    tally.check(std::max(std::abs(lim.a - (1.0 - t)), std::abs(lim.b - t)), 1e-8);
  }
  const std::size_t forms = std::min<std::size_t>(r.cases, 1000);
  for (std::size_t i = 0; i < forms; ++i) {
    const Curvature k(uniform(rng, 0.25, 4.0));
    const auto p = LorentzPoint::lift(in_ball(rng, 6, 5.0), k);
    const auto q = LorentzPoint::lift(in_ball(rng, 6, 5.0), k);
    const double t = uniform(rng, 0.0, 1.0);
    const auto a = interp::geodesic_interpolate(p, q, t, k);
    const auto b = interp::geodesic_interpolate_via_maps(p, q, t, k);
    tally.check(max_abs_diff(a.spatial(), b.spatial()), 1e-7);
  }
  r.seconds = timer.seconds();
  r.note = "coefficient inequalities, beta->0 limit, closed form vs exp(t log)";
  return r;
}

SuiteResult compression(std::size_t trials, std::uint64_t seed) {
  auto r = named("compression");
  Timer timer;
  std::mt19937_64 rng(seed);
  r.cases = trials ? trials : 10000;
  double min_gap = INFINITY;
  for (std::size_t i = 0; i < r.cases; ++i) {
    const Curvature k(uniform(rng, 0.25, 4.0));
    std::vector<double> a, b;
    if (i % 5 == 4) {
      // Collinear, same side of the origin.
      a = in_ball(rng, 16, 10.0);
      b = a;
      double c = uniform(rng, 0.05, 3.0);
      if (std::abs(c - 1.0) < 1e-3) c = 2.0;
      for (auto& x : b) x *= c;
    } else {
      a = gaussian(rng, 16, uniform(rng, 0.05, 2.5));
      b = gaussian(rng, 16, uniform(rng, 0.05, 2.5));
      // The property needs <p, q> >= 0; obtuse pairs can expand (see README).
      double dot = 0.0;
      for (std::size_t j = 0; j < 16; ++j) dot += a[j] * b[j];
      if (dot < 0.0) {
        for (auto& x : b) x = -x;
      }
    }
    if (a == b) continue;
    const auto p = LorentzPoint::lift(a, k);
    const auto q = LorentzPoint::lift(b, k);
    for (int ti = 1; ti <= 9; ++ti) {
      const double gap = interp::compression_gap(p, q, ti / 10.0, k);
      min_gap = std::min(min_gap, gap);
      if (!(gap > 0.0)) ++r.failures;
    }
  }
  r.worst = min_gap;
  r.seconds = timer.seconds();
  r.note = "16-dim pairs with <p,q> >= 0 incl. same-direction collinear; worst = smallest gap";
  return r;
}

SuiteResult gradient(std::size_t trials, std::uint64_t seed) {
  auto r = named("gradient");
  Timer timer;
  Tally tally{r};
  std::mt19937_64 rng(seed);
  r.cases = trials ? trials : 20;
  const model::Ablation ablations[] = {model::Ablation::kFull, model::Ablation::kNoInterp,
                                       model::Ablation::kEuclideanInterp,
                                       model::Ablation::kEuclideanSpace};
  for (std::size_t i = 0; i < r.cases; ++i) {
    model::ModelConfig c;
    c.d = i % 2 == 0 ? 4 : 16;
    c.d_b = c.d / 4 + 1;
    c.ablation = i < 8 ? model::Ablation::kFull : ablations[i % 4];
    c.loss_mode = i % 3 == 2 ? model::LossMode::kPaperLiteral : model::LossMode::kStandard;
    const std::size_t batch_size = (i / 2) % 2 == 0 ? 4 : 8;
    auto params = model::HyfiParams::init(c, seed + i);
    std::normal_distribution<double> jitter(0.0, 0.05);
    for (auto& x : params.values.flat()) x += jitter(rng);
    std::vector<synth::PairedItem> batch(batch_size);
    for (auto& item : batch) {
      item.semantic = gaussian(rng, c.d, 1.5);
      item.perceptual = gaussian(rng, c.d, 1.5);
      item.brain = gaussian(rng, c.d_b, 1.5);
    }
    const auto vg = grad::value_and_grad(
        [&](grad::Tape& tape, const grad::ParamVars& vars) {
          return model::record_total_loss(tape, vars, batch, c);
        },
        params.values);
    const auto fd = grad::finite_diff_grad(
        [&](const grad::ParamVector& v) { return model::total_loss(batch, {c, v}); },
        params.values, 1e-5);
    tally.check(grad::max_relative_error(vg.grad.flat(), fd.flat()), 1e-4);
  }
  r.seconds = timer.seconds();
  r.note = "total loss, B in {4,8}, d in {4,16}, central differences h=1e-5, rel. tol 1e-4";
  return r;
}

SuiteResult model(std::size_t trials, std::uint64_t seed) {
  auto r = named("model");
  Timer timer;
  Tally tally{r};
  std::mt19937_64 rng(seed);
  r.cases = trials ? trials : 100;
  for (std::size_t i = 0; i < r.cases; ++i) {
    model::ModelConfig c;
    c.d = 6;
    c.d_b = 3;
    auto params = model::HyfiParams::init(c, seed + i);
    std::normal_distribution<double> jitter(0.0, 0.1);
    for (auto& x : params.values.flat()) x += jitter(rng);
    std::vector<synth::PairedItem> batch(6);
    for (auto& item : batch) {
      item.semantic = gaussian(rng, c.d, 1.5);
      item.perceptual = gaussian(rng, c.d, 1.5);
      item.brain = gaussian(rng, c.d_b, 1.5);
    }
    const double base = model::total_loss(batch, params);
    auto shuffled = batch;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    tally.check(std::abs(model::total_loss(shuffled, params) - base), 1e-10);

    auto forced = params;
    forced.config.forced_t = 0.0;
    auto ablated = params;
    ablated.config.ablation = model::Ablation::kNoInterp;
    tally.check(std::abs(model::total_loss(batch, forced) - model::total_loss(batch, ablated)), 1e-9);

    const auto sim = gaussian(rng, 36);
    auto scaled = sim;
    for (auto& s : scaled) s *= 2.5;
    tally.check(std::abs(model::info_nce(sim, 6, 0.3, model::LossMode::kStandard) -
                         model::info_nce(scaled, 6, 0.75, model::LossMode::kStandard)),
                1e-10);
  }
  r.seconds = timer.seconds();
  r.note = "permutation equivariance, t=0 equals no_interp, temperature scaling";
  return r;
}

SuiteResult retrieval(std::size_t trials, std::uint64_t seed) {
  auto r = named("retrieval");
  Timer timer;
  r.cases = trials ? trials : 20;
  const std::size_t ks[] = {1, 5};
  double sum = 0.0;
  std::size_t n_ways = 0;
  for (std::size_t s = 0; s < r.cases; ++s) {
    synth::SynthConfig sc;
    sc.seed = seed + s;
    const auto data = synth::generate(sc);
    const auto rep = trainer::evaluate_retrieval(
        data.test, model::HyfiParams::init(model::ModelConfig{}, seed + s), ks);
    if (rep.top5 < rep.top1) ++r.failures;
    sum += rep.top1;
    n_ways = rep.n_ways;
  }
  const double p = 1.0 / static_cast<double>(n_ways);
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n_ways * r.cases));
  const double z = std::abs(sum / static_cast<double>(r.cases) - p) / se;
  if (!(z < 3.0)) ++r.failures;
  r.worst = z;

  // Oracle alignment: brain and visual encoders map item i to the same point.
  model::ModelConfig mc;
  mc.d = 8;
  mc.d_b = 8;
  mc.ablation = model::Ablation::kNoInterp;
  auto params = model::HyfiParams::init(mc, seed);
  for (auto name : {"w_s", "brain_w"}) {
    auto w = params.values[name];
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < 8; ++i) w[i * 8 + i] = 1.0;
  }
  std::mt19937_64 rng(seed);
  synth::PairedDataset test{8, 8, 8, {}};
  for (std::uint32_t i = 0; i < 50; ++i) {
    auto x = gaussian(rng, 8);
    test.items.push_back({x, gaussian(rng, 8), x, i});
  }
  if (trainer::evaluate_retrieval(test, params, ks).top1 != 1.0) ++r.failures;
  r.seconds = timer.seconds();
  r.note = "untrained top-1 within 3 standard errors of chance (worst = |z|); oracle top-1 = 1";
  return r;
}

SuiteResult augmentation(std::size_t trials, std::uint64_t seed) {
  auto r = named("augmentation");
  Timer timer;
  Tally tally{r};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  r.cases = trials ? trials : 20;
  for (std::size_t i = 0; i < r.cases; ++i) {
    const std::size_t radius = 2 * (i % 6) + 1;
    const double sigma = 0.4 + u(rng) * 3.0;
    synth::ImageGrid flat(32, 32, u(rng));
    const auto c = synth::gaussian_blur(flat, sigma, radius);
    tally.check(max_abs_diff(c.pixels, flat.pixels), 1e-12);

    synth::ImageGrid img(32, 32);
    for (auto& x : img.pixels) x = u(rng);
    const auto out = synth::gaussian_blur(img, sigma, radius);
    // Direct double sum over the unseparated 2-D kernel.
    const auto kernel = synth::gaussian_kernel(sigma, radius);
    const long k = static_cast<long>(radius / 2);
    double worst = 0.0;
    for (long y = 0; y < 32; ++y) {
      for (long x = 0; x < 32; ++x) {
        double s = 0.0;
        for (long m = -k; m <= k; ++m) {
          for (long n = -k; n <= k; ++n) {
            const auto yy = static_cast<std::size_t>(std::clamp(y - m, 0L, 31L));
            const auto xx = static_cast<std::size_t>(std::clamp(x - n, 0L, 31L));
            s += kernel[static_cast<std::size_t>((m + k) * static_cast<long>(radius) + (n + k))] *
                 img.at(yy, xx);
          }
        }
        worst = std::max(worst, std::abs(s - out.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x))));
      }
    }
    tally.check(worst, 1e-9);

    const synth::Pixel centre{static_cast<std::size_t>(u(rng) * 32), static_cast<std::size_t>(u(rng) * 32)};
    const auto fov = synth::fovea_blur(img, synth::kFoveaLambda, sigma, radius, centre);
    tally.require(fov.at(centre.row, centre.col) == img.at(centre.row, centre.col));
  }
  r.seconds = timer.seconds();
  r.note = "constant invariance 1e-12, direct convolution 1e-9, fovea centre exact";
  return r;
}

SuiteResult optimizer(std::size_t trials, std::uint64_t seed) {
  auto r = named("optimizer");
  Timer timer;
  Tally tally{r};
  std::mt19937_64 rng(seed);
  r.cases = trials ? trials : 3;
  trainer::TrainConfig config;
  config.lr = 0.05;
  config.weight_decay = 0.01;
  grad::ParamLayout layout;
  layout.add("theta", 1);
  const double a = uniform(rng, 0.5, 4.0);
  const double centre = uniform(rng, -1.0, 1.0);
  grad::ParamVector params(layout, {uniform(rng, -2.0, 2.0)});
  trainer::AdamState state;
  // Scalar reference: decay, moments, bias correction, step.
  double theta = params.flat()[0], m = 0.0, v = 0.0;
  for (std::size_t step = 1; step <= r.cases; ++step) {
    grad::ParamVector g(layout, {a * (params.flat()[0] - centre)});
    trainer::optimizer_step(params, g, state, config);
    const double gr = a * (theta - centre);
    theta *= 1.0 - config.lr * config.weight_decay;
    m = 0.9 * m + 0.1 * gr;
    v = 0.999 * v + 0.001 * gr * gr;
    const double mh = m / (1.0 - std::pow(0.9, static_cast<double>(step)));
    const double vh = v / (1.0 - std::pow(0.999, static_cast<double>(step)));
    theta -= config.lr * mh / (std::sqrt(vh) + 1e-8);
    tally.check(std::abs(params.flat()[0] - theta), 1e-12);
  }
  r.seconds = timer.seconds();
  r.note = "scalar quadratic AdamW trace vs step-by-step reference, 1e-12";
  return r;
}

}  // namespace hyfi::checks

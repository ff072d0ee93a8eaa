#include "hyfi/interp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyfi::interp {

namespace {

constexpr double kLargeBeta = 20.0;

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

InterpCoefficients sinh_coefficients(double t, double beta) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::domain_error("interpolation parameter must lie in [0,1], got " +
                            std::to_string(t));
  }
  if (!std::isfinite(beta) || beta < 0.0) {
    throw std::domain_error("beta must be finite and non-negative");
  }
  const double s = 1.0 - t;
  if (beta > kLargeBeta) {
    // Ratios of sinh rewritten with decaying exponentials to stay finite.
    const double denom = -std::expm1(-2.0 * beta);
    const double a = std::exp(-t * beta) * -std::expm1(-2.0 * s * beta) / denom;
    const double b = std::exp(-s * beta) * -std::expm1(-2.0 * t * beta) / denom;
    return {a, b, beta, t};
  }
  const double sb = hygeo::sinhc(beta);
  return {s * hygeo::sinhc(s * beta) / sb, t * hygeo::sinhc(t * beta) / sb, beta, t};
}

LorentzPoint geodesic_interpolate(const LorentzPoint& p, const LorentzPoint& q, double t,
                                  Curvature kappa) {
  const double beta = hygeo::acosh1p(hygeo::lorentz_gap(p, q, kappa));
  const auto c = sinh_coefficients(t, beta);
  if (beta == 0.0) return p;
  const auto ps = p.spatial();
  const auto qs = q.spatial();
  std::vector<double> out(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) out[i] = c.a * ps[i] + c.b * qs[i];
  return LorentzPoint::lift(out, kappa);
}

LorentzPoint geodesic_interpolate_via_maps(const LorentzPoint& p, const LorentzPoint& q,
                                           double t, Curvature kappa) {
  return hygeo::exp_map(hygeo::log_map(p, q, kappa), t, kappa);
}

double compression_gap(const LorentzPoint& p, const LorentzPoint& q, double t,
                       Curvature kappa) {
  if (!(t > 0.0 && t < 1.0)) {
    throw std::domain_error("compression_gap needs t strictly inside (0,1), got " +
                            std::to_string(t));
  }
  const auto ps = p.spatial();
  const auto qs = q.spatial();
  std::vector<double> mid(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) mid[i] = (1.0 - t) * ps[i] + t * qs[i];
  const auto g = geodesic_interpolate(p, q, t, kappa);
  return norm(mid) - norm(g.spatial());
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double interpolation_coefficient(std::span<const double> feature, std::span<const double> w_t,
                                 double bias) {
  if (feature.size() != w_t.size()) {
    throw hygeo::DimensionError("interpolation_coefficient: feature has " +
                                std::to_string(feature.size()) + " entries, weights have " +
                                std::to_string(w_t.size()));
  }
  double z = bias;
  for (std::size_t i = 0; i < feature.size(); ++i) z += feature[i] * w_t[i];
  return sigmoid(z);
}

}  // namespace hyfi::interp

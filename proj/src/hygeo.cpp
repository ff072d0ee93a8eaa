#include "hyfi/hygeo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hyfi::hygeo {

namespace {

constexpr double kSeriesCutoff = 1e-6;
constexpr double kAcoshSeriesCutoff = 1e-7;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

Curvature::Curvature(double kappa) : kappa_(kappa), sqrt_kappa_(std::sqrt(kappa)) {
  if (!std::isfinite(kappa) || kappa <= 0.0) {
    throw std::invalid_argument("curvature parameter must be positive and finite, got " +
                                std::to_string(kappa));
  }
}

LorentzPoint LorentzPoint::lift(std::span<const double> spatial, Curvature kappa) {
  double norm2 = 0.0;
  for (double x : spatial) {
    if (!std::isfinite(x)) throw std::invalid_argument("lift: non-finite spatial coordinate");
    norm2 += x * x;
  }
  const double time = std::sqrt(1.0 / kappa.kappa() + norm2);
  if (!std::isfinite(time)) throw std::invalid_argument("lift: spatial norm overflows");
  return LorentzPoint(std::vector<double>(spatial.begin(), spatial.end()), time);
}

LorentzPoint LorentzPoint::origin(std::size_t n, Curvature kappa) {
  return LorentzPoint(std::vector<double>(n, 0.0), 1.0 / kappa.sqrt_kappa());
}

std::vector<double> LorentzPoint::ambient() const {
  std::vector<double> out;
  out.reserve(spatial_.size() + 1);
  out.push_back(time_);
  out.insert(out.end(), spatial_.begin(), spatial_.end());
  return out;
}

TangentVector TangentVector::from_spatial(const LorentzPoint& base,
                                          std::span<const double> spatial) {
  require_same_dim(base.dim(), spatial.size(), "TangentVector");
  std::vector<double> comps;
  comps.reserve(spatial.size() + 1);
  comps.push_back(dot(base.spatial(), spatial) / base.time());
  comps.insert(comps.end(), spatial.begin(), spatial.end());
  return TangentVector{base, std::move(comps)};
}

double lorentz_inner(std::span<const double> p, std::span<const double> q) {
  require_same_dim(p.size(), q.size(), "lorentz_inner");
  if (p.size() < 2) throw DimensionError("lorentz_inner: vectors need at least 2 components");
  return -p[0] * q[0] + dot(p.subspan(1), q.subspan(1));
}

double lorentz_inner(const LorentzPoint& p, const LorentzPoint& q) {
  require_same_dim(p.dim(), q.dim(), "lorentz_inner");
  return -p.time() * q.time() + dot(p.spatial(), q.spatial());
}

double acosh1p(double x) {
  x = std::max(x, 0.0);
  if (x < kAcoshSeriesCutoff) return std::sqrt(2.0 * x) * (1.0 - x / 12.0);
  return std::log1p(x + std::sqrt(x * (x + 2.0)));
}

double sinhc(double x) {
  if (std::abs(x) < kSeriesCutoff) return 1.0 + x * x / 6.0;
  return std::sinh(x) / x;
}

double cosh_stable(double x) {
  if (std::abs(x) < kSeriesCutoff) return 1.0 + x * x / 2.0;
  return std::cosh(x);
}

double lorentz_gap(const LorentzPoint& p, const LorentzPoint& q, Curvature kappa) {
  require_same_dim(p.dim(), q.dim(), "lorentz_gap");
  // -k<p,q>_L - 1 = k/2 * (|p~ - q~|^2 - (p0 - q0)^2), with
  // p0 - q0 = (p~ - q~).(p~ + q~) / (p0 + q0).
  double diff2 = 0.0;
  double cross = 0.0;
  const auto ps = p.spatial();
  const auto qs = q.spatial();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double d = ps[i] - qs[i];
    diff2 += d * d;
    cross += d * (ps[i] + qs[i]);
  }
  const double dt = cross / (p.time() + q.time());
  return std::max(0.5 * kappa.kappa() * (diff2 - dt * dt), 0.0);
}

double geodesic_distance(const LorentzPoint& p, const LorentzPoint& q, Curvature kappa) {
  return acosh1p(lorentz_gap(p, q, kappa)) / kappa.sqrt_kappa();
}

double tangent_norm(std::span<const double> v) {
  if (v.size() < 2) throw DimensionError("tangent vector needs at least 2 components");
  return std::sqrt(std::max(-v[0] * v[0] + dot(v.subspan(1), v.subspan(1)), 0.0));
}

LorentzPoint exp_map(const LorentzPoint& p, std::span<const double> v, double t,
                     Curvature kappa) {
  require_same_dim(p.dim() + 1, v.size(), "exp_map");
  const auto vs = v.subspan(1);
  const double space2 = dot(vs, vs);
  const double norm2 = space2 - v[0] * v[0];
  if (norm2 < -1e-9 * (1.0 + space2 + v[0] * v[0])) {
    throw TimelikeTangentError("exp_map: tangent vector is timelike (<v,v>_L = " +
                               std::to_string(norm2) + ")");
  }
  const double theta = t * kappa.sqrt_kappa() * std::sqrt(std::max(norm2, 0.0));
  const double c = cosh_stable(theta);
  const double s = t * sinhc(theta);
  const auto ps = p.spatial();
  std::vector<double> out(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) out[i] = c * ps[i] + s * vs[i];
  return LorentzPoint::lift(out, kappa);
}

LorentzPoint exp_map(const TangentVector& v, double t, Curvature kappa) {
  return exp_map(v.base, v.components, t, kappa);
}

TangentVector log_map(const LorentzPoint& p, const LorentzPoint& q, Curvature kappa) {
  const double x = lorentz_gap(p, q, kappa);
  const double beta = acosh1p(x);
  // log_p(q) = beta / sinh(beta) * (q - alpha p), alpha = 1 + x.
  const double coef = 1.0 / sinhc(beta);
  const auto ps = p.spatial();
  const auto qs = q.spatial();
  std::vector<double> spatial(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    spatial[i] = coef * ((qs[i] - ps[i]) - x * ps[i]);
  }
  return TangentVector::from_spatial(p, spatial);
}

LorentzPoint exp_map_origin(std::span<const double> v_enc, Curvature kappa) {
  const double theta = kappa.sqrt_kappa() * std::sqrt(dot(v_enc, v_enc));
  const double s = sinhc(theta);
  std::vector<double> out(v_enc.size());
  for (std::size_t i = 0; i < v_enc.size(); ++i) out[i] = s * v_enc[i];
  return LorentzPoint::lift(out, kappa);
}

}  // namespace hyfi::hygeo

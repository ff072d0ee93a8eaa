#pragma once

// Lorentz (hyperboloid) model of hyperbolic space.
//
// Points are stored by their spatial coordinates only; the time coordinate is
// derived as sqrt(1/kappa + |spatial|^2) whenever a point is built, so every
// LorentzPoint lies on the hyperboloid by construction.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace hyfi::hygeo {

/// Curvature of the space is -kappa.
class Curvature {
 public:
  explicit Curvature(double kappa);

  double kappa() const { return kappa_; }
  double sqrt_kappa() const { return sqrt_kappa_; }

 private:
  double kappa_;
  double sqrt_kappa_;
};

class LorentzPoint {
 public:
  /// Builds the point whose spatial part is `spatial`. Throws on non-finite input.
  static LorentzPoint lift(std::span<const double> spatial, Curvature kappa);
  /// The time origin O = (1/sqrt(kappa), 0, ..., 0) of an n-dimensional space.
  static LorentzPoint origin(std::size_t n, Curvature kappa);

  std::span<const double> spatial() const { return spatial_; }
  double time() const { return time_; }
  std::size_t dim() const { return spatial_.size(); }
  /// Full (n+1)-vector (time, spatial...).
  std::vector<double> ambient() const;

  bool operator==(const LorentzPoint&) const = default;

 private:
  LorentzPoint(std::vector<double> spatial, double time)
      : spatial_(std::move(spatial)), time_(time) {}

  std::vector<double> spatial_;
  double time_;
};

/// Vector of the tangent space at `base`, stored as (n+1) ambient components.
struct TangentVector {
  LorentzPoint base;
  std::vector<double> components;

  /// Time component chosen so that <base, v>_L = 0 exactly.
  static TangentVector from_spatial(const LorentzPoint& base,
                                    std::span<const double> spatial);
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class TimelikeTangentError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// -p0*q0 + <p~, q~>_E on raw ambient vectors.
double lorentz_inner(std::span<const double> p, std::span<const double> q);
double lorentz_inner(const LorentzPoint& p, const LorentzPoint& q);

/// Stable evaluation of acosh(1 + x) for x >= 0 (negative x is clamped to 0).
double acosh1p(double x);
/// sinh(x)/x with its limit at 0.
double sinhc(double x);
/// cosh(x) with the small-argument series.
double cosh_stable(double x);

/// -kappa<p,q>_L - 1, computed without cancellation for nearby points.
double lorentz_gap(const LorentzPoint& p, const LorentzPoint& q, Curvature kappa);

double geodesic_distance(const LorentzPoint& p, const LorentzPoint& q, Curvature kappa);

/// exp_p(t v). `v` holds n+1 ambient components. Extrapolation (t outside
/// [0,1]) is evaluated as-is.
LorentzPoint exp_map(const LorentzPoint& p, std::span<const double> v, double t,
                     Curvature kappa);
LorentzPoint exp_map(const TangentVector& v, double t, Curvature kappa);

TangentVector log_map(const LorentzPoint& p, const LorentzPoint& q, Curvature kappa);

/// exp_O([0, v_enc]).
LorentzPoint exp_map_origin(std::span<const double> v_enc, Curvature kappa);

/// sqrt(max(<v,v>_L, 0)).
double tangent_norm(std::span<const double> v);

}  // namespace hyfi::hygeo

#pragma once

// Geodesic interpolation between two hyperboloid points and the compression
// diagnostics built on it.

#include <span>

#include "hyfi/hygeo.hpp"

namespace hyfi::interp {

using hygeo::Curvature;
using hygeo::LorentzPoint;

/// Weights of gamma(t) = a p + b q along the geodesic of length beta/sqrt(kappa).
struct InterpCoefficients {
  double a;
  double b;
  double beta;
  double t;
};

/// a = sinh((1-t)beta)/sinh(beta), b = sinh(t beta)/sinh(beta); (1-t, t) at beta = 0.
InterpCoefficients sinh_coefficients(double t, double beta);

/// Closed-form geodesic point at parameter t, re-lifted onto the hyperboloid.
LorentzPoint geodesic_interpolate(const LorentzPoint& p, const LorentzPoint& q, double t,
                                  Curvature kappa);

/// exp_p(t log_p(q)); slower, kept as an independent route to the same point.
LorentzPoint geodesic_interpolate_via_maps(const LorentzPoint& p, const LorentzPoint& q,
                                           double t, Curvature kappa);

/// |(1-t)p~ + t q~| - |spatial(gamma(t))|, for t strictly inside (0,1).
double compression_gap(const LorentzPoint& p, const LorentzPoint& q, double t,
                       Curvature kappa);

double sigmoid(double x);

/// sigmoid(<w_t, feature> + bias).
double interpolation_coefficient(std::span<const double> feature, std::span<const double> w_t,
                                 double bias);

}  // namespace hyfi::interp

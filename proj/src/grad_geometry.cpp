#include "hyfi/grad_geometry.hpp"

#include <stdexcept>

namespace hyfi::grad {

VarCurvature::VarCurvature(Var k) : kappa(k), sqrt_kappa(sqrt(k)), inv_kappa(1.0 / k) {}

VarPoint lift(std::vector<Var> spatial, const VarCurvature& kappa) {
  if (spatial.empty()) throw std::invalid_argument("lift: empty spatial vector");
  Tape& tape = *spatial.front().tape();
  Var norm2 = tape.sumsq(spatial);
  Var time = sqrt(kappa.inv_kappa + norm2);
  return VarPoint{std::move(spatial), norm2, time};
}

VarPoint exp_map_origin(std::span<const Var> v_enc, const VarCurvature& kappa) {
  if (v_enc.empty()) throw std::invalid_argument("exp_map_origin: empty vector");
  Tape& tape = *v_enc.front().tape();
  // sinh(sqrt(k)|v|) / (sqrt(k)|v|) written as a smooth function of k|v|^2.
  Var s = sinhc_sqrt(kappa.kappa * tape.sumsq(v_enc));
  std::vector<Var> spatial;
  spatial.reserve(v_enc.size());
  for (auto v : v_enc) spatial.push_back(s * v);
  return lift(std::move(spatial), kappa);
}

Var lorentz_gap(const VarPoint& p, const VarPoint& q, const VarCurvature& kappa) {
  Tape& tape = *p.time.tape();
  Var diff2 = tape.sqdist(p.spatial, q.spatial);
  Var dt = tape.normdiff(p.spatial, q.spatial) / (p.time + q.time);
  return 0.5 * kappa.kappa * (diff2 - square(dt));
}

Var geodesic_distance(const VarPoint& p, const VarPoint& q, const VarCurvature& kappa) {
  return acosh1p(lorentz_gap(p, q, kappa)) / kappa.sqrt_kappa;
}

VarPoint geodesic_interpolate(const VarPoint& p, const VarPoint& q, Var t,
                              const VarCurvature& kappa) {
  if (p.spatial.size() != q.spatial.size()) {
    throw std::invalid_argument("geodesic_interpolate: dimension mismatch");
  }
  Var beta = acosh1p(lorentz_gap(p, q, kappa));
  Var s = 1.0 - t;
  Var denom = sinhc(beta);
  Var a = s * sinhc(s * beta) / denom;
  Var b = t * sinhc(t * beta) / denom;
  std::vector<Var> spatial;
  spatial.reserve(p.spatial.size());
  for (std::size_t i = 0; i < p.spatial.size(); ++i) {
    spatial.push_back(a * p.spatial[i] + b * q.spatial[i]);
  }
  return lift(std::move(spatial), kappa);
}

}  // namespace hyfi::grad

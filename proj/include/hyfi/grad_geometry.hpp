#pragma once

// Lorentz-model operations recorded on a Tape. Each mirrors its double-valued
// counterpart in hygeo / interp and uses the same stabilized formulas.

#include <span>
#include <vector>

#include "hyfi/grad.hpp"

namespace hyfi::grad {

/// Point parameterized by its spatial coordinates; time is derived.
struct VarPoint {
  std::vector<Var> spatial;
  Var norm2;  // |spatial|^2
  Var time;
};

/// Curvature as seen by the tape; `kappa` is usually exp(log_kappa).
struct VarCurvature {
  Var kappa;
  Var sqrt_kappa;
  Var inv_kappa;

  explicit VarCurvature(Var kappa);
};

VarPoint lift(std::vector<Var> spatial, const VarCurvature& kappa);
VarPoint exp_map_origin(std::span<const Var> v_enc, const VarCurvature& kappa);
/// -kappa<p,q>_L - 1
Var lorentz_gap(const VarPoint& p, const VarPoint& q, const VarCurvature& kappa);
Var geodesic_distance(const VarPoint& p, const VarPoint& q, const VarCurvature& kappa);
/// Sinh-coefficient geodesic point at parameter t.
VarPoint geodesic_interpolate(const VarPoint& p, const VarPoint& q, Var t,
                              const VarCurvature& kappa);

}  // namespace hyfi::grad

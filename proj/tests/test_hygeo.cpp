#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "hyfi/hygeo.hpp"
#include "oracles.hpp"

using namespace hyfi::hygeo;

namespace {

const Curvature kUnit(1.0);

double constraint_error(const LorentzPoint& p, Curvature k) {
  return std::abs(k.kappa() * lorentz_inner(p, p) + 1.0);
}

}  // namespace

TEST(Curvature, RejectsNonPositive) {
  EXPECT_THROW(Curvature(0.0), std::invalid_argument);
  EXPECT_THROW(Curvature(-1.0), std::invalid_argument);
  EXPECT_THROW(Curvature(std::nan("")), std::invalid_argument);
  EXPECT_DOUBLE_EQ(Curvature(4.0).sqrt_kappa(), 2.0);
}

TEST(LorentzInner, OriginSelfProduct) {
  const auto o = LorentzPoint::origin(2, kUnit);
  EXPECT_DOUBLE_EQ(lorentz_inner(o, o), -1.0);
}

TEST(LorentzInner, ClosedFormPair) {
  const std::vector<double> p{1, 0, 0};
  const std::vector<double> q{std::cosh(1.0), std::sinh(1.0), 0};
  EXPECT_NEAR(lorentz_inner(p, q), -1.543081, 1e-6);
}

TEST(LorentzInner, DimensionMismatchThrows) {
  const std::vector<double> p{1, 0, 0};
  const std::vector<double> q{1, 0};
  EXPECT_THROW(lorentz_inner(p, q), DimensionError);
  const std::vector<double> one{1};
  EXPECT_THROW(lorentz_inner(one, one), DimensionError);
}

TEST(LorentzInner, RandomPairsAgreeWithDirectFormula) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double k = std::uniform_real_distribution<double>(0.25, 4.0)(rng);
    auto a = oracle::random_ball(rng, 3, 5.0);
    auto b = oracle::random_ball(rng, 3, 5.0);
    const auto p = LorentzPoint::lift(a, Curvature(k));
    const auto q = LorentzPoint::lift(b, Curvature(k));
    const double ip = lorentz_inner(p, q);
    const auto ref = oracle::inner(oracle::ambient(a, k), oracle::ambient(b, k));
    EXPECT_NEAR(ip, static_cast<double>(ref), 1e-9 * std::abs(static_cast<double>(ref)));
    EXPECT_GE(-k * ip, 1.0 - 1e-12);
  }
}

TEST(Lift, TimeComponent) {
  EXPECT_DOUBLE_EQ(LorentzPoint::lift(std::vector<double>{0, 0}, kUnit).time(), 1.0);
  EXPECT_DOUBLE_EQ(LorentzPoint::lift(std::vector<double>{3, 4}, kUnit).time(), std::sqrt(26.0));
  EXPECT_DOUBLE_EQ(LorentzPoint::lift(std::vector<double>{0.5}, Curvature(2.0)).time(),
                   std::sqrt(0.75));
}

TEST(Lift, NonFiniteThrows) {
  EXPECT_THROW(LorentzPoint::lift(std::vector<double>{1.0, std::nan("")}, kUnit),
               std::invalid_argument);
  EXPECT_THROW(
      LorentzPoint::lift(std::vector<double>{std::numeric_limits<double>::infinity()}, kUnit),
      std::invalid_argument);
}

TEST(Distance, OriginToItself) {
  const auto o = LorentzPoint::origin(3, kUnit);
  EXPECT_EQ(geodesic_distance(o, o, kUnit), 0.0);
}

TEST(Distance, ExpFromOriginHasTangentLength) {
  const auto o = LorentzPoint::origin(2, kUnit);
  const auto q = exp_map(o, std::vector<double>{0, 2, 0}, 1.0, kUnit);
  EXPECT_NEAR(geodesic_distance(o, q, kUnit), 2.0, 1e-12);
}

TEST(Distance, OrthogonalSinhPair) {
  const double s = std::sinh(1.0);
  const auto p = LorentzPoint::lift(std::vector<double>{s, 0}, kUnit);
  const auto q = LorentzPoint::lift(std::vector<double>{0, s}, kUnit);
  const double ref = oracle::distance({s, 0}, {0, s}, 1.0);
  EXPECT_NEAR(ref, std::acosh(std::cosh(1.0) * std::cosh(1.0)), 1e-12);
  EXPECT_NEAR(geodesic_distance(p, q, kUnit), ref, 1e-6);
  // The commonly quoted 1.5123 is a loose rounding of acosh(cosh^2 1) = 1.51337.
  EXPECT_NEAR(geodesic_distance(p, q, kUnit), 1.5123, 2e-3);
}

TEST(Distance, NearCoincidentPointsKeepPrecision) {
  // Raw acosh of -<p,q> returns 0 here; the gap formula resolves the 1e-9 offset.
  const auto p = LorentzPoint::lift(std::vector<double>{3.0, -2.0}, kUnit);
  const auto q = LorentzPoint::lift(std::vector<double>{3.0 + 1e-9, -2.0}, kUnit);
  const double d = geodesic_distance(p, q, kUnit);
  // Metric factor along x1 at this point: sqrt(1 - x1^2 / p0^2) / ... evaluated by small step.
  const double p0 = std::sqrt(1.0 + 9.0 + 4.0);
  const double g11 = 1.0 - 9.0 / (p0 * p0);
  EXPECT_NEAR(d, 1e-9 * std::sqrt(g11), 1e-15);
}

TEST(Distance, AxiomsOnRandomTriples) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Curvature k(std::uniform_real_distribution<double>(0.25, 4.0)(rng));
    const auto p = LorentzPoint::lift(oracle::random_ball(rng, 4, 5.0), k);
    const auto q = LorentzPoint::lift(oracle::random_ball(rng, 4, 5.0), k);
    const auto r = LorentzPoint::lift(oracle::random_ball(rng, 4, 5.0), k);
    const double pq = geodesic_distance(p, q, k);
    EXPECT_NEAR(pq, geodesic_distance(q, p, k), 1e-10);
    EXPECT_EQ(geodesic_distance(p, p, k), 0.0);
    EXPECT_LE(pq, geodesic_distance(p, r, k) + geodesic_distance(r, q, k) + 1e-8);
    EXPECT_NEAR(pq, oracle::distance({p.spatial().begin(), p.spatial().end()},
                                     {q.spatial().begin(), q.spatial().end()}, k.kappa()),
                1e-8 * (1.0 + pq));
  }
}

TEST(Acosh1p, SeriesAndClamp) {
  EXPECT_EQ(acosh1p(0.0), 0.0);
  EXPECT_EQ(acosh1p(-1e-3), 0.0);
  EXPECT_NEAR(acosh1p(1e-8), std::sqrt(2e-8) * (1 - 1e-8 / 12), 1e-20);
  EXPECT_NEAR(acosh1p(2.0), std::acosh(3.0), 1e-15);
  EXPECT_DOUBLE_EQ(sinhc(0.0), 1.0);
  EXPECT_NEAR(sinhc(1e-7), 1.0, 1e-14);
  EXPECT_NEAR(sinhc(2.0), std::sinh(2.0) / 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(cosh_stable(0.0), 1.0);
}

TEST(ExpMap, ZeroVectorIsIdentity) {
  const auto p = LorentzPoint::lift(std::vector<double>{0.3, -1.2}, kUnit);
  const std::vector<double> zero(3, 0.0);
  EXPECT_EQ(exp_map(p, zero, 1.0, kUnit), p);
  const auto v = log_map(p, LorentzPoint::origin(2, kUnit), kUnit);
  EXPECT_EQ(exp_map(v, 0.0, kUnit), p);
}

TEST(ExpMap, ClosedFormFromOrigin) {
  const auto o = LorentzPoint::origin(2, kUnit);
  const auto q = exp_map(o, std::vector<double>{0, 1, 0}, 1.0, kUnit);
  EXPECT_NEAR(q.time(), std::cosh(1.0), 1e-15);
  EXPECT_NEAR(q.spatial()[0], std::sinh(1.0), 1e-15);
  EXPECT_EQ(q.spatial()[1], 0.0);
}

TEST(ExpMap, DistanceEqualsTangentNorm) {
  const auto o = LorentzPoint::origin(2, kUnit);
  const auto q = exp_map(o, std::vector<double>{0, 0.3, 0.4}, 1.0, kUnit);
  EXPECT_NEAR(oracle::distance({0, 0}, {q.spatial()[0], q.spatial()[1]}, 1.0), 0.5, 1e-12);
  EXPECT_NEAR(geodesic_distance(o, q, kUnit), 0.5, 1e-12);
}

TEST(ExpMap, TimelikeTangentThrows) {
  const auto o = LorentzPoint::origin(2, kUnit);
  EXPECT_THROW(exp_map(o, std::vector<double>{1, 0, 0}, 1.0, kUnit), TimelikeTangentError);
  EXPECT_THROW(exp_map(o, std::vector<double>{0, 0}, 1.0, kUnit), DimensionError);
}

TEST(ExpMap, MatchesAmbientFormulaOffOrigin) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const double k = std::uniform_real_distribution<double>(0.25, 4.0)(rng);
    const auto a = oracle::random_ball(rng, 3, 3.0);
    const auto p = LorentzPoint::lift(a, Curvature(k));
    const auto v = TangentVector::from_spatial(p, oracle::random_ball(rng, 3, 2.0));
    const auto got = exp_map(v, 1.0, Curvature(k));
    const std::vector<long double> vl(v.components.begin(), v.components.end());
    const auto ref = oracle::exp_spatial(a, vl, k);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(got.spatial()[j], ref[j], 1e-9 * (1 + std::abs(ref[j])));
  }
}

TEST(LogMap, SelfIsZero) {
  const auto p = LorentzPoint::lift(std::vector<double>{2.0, -1.0, 0.5}, Curvature(0.5));
  const auto v = log_map(p, p, Curvature(0.5));
  for (double c : v.components) EXPECT_EQ(c, 0.0);
}

TEST(LogMap, InvertsClosedFormExp) {
  const auto o = LorentzPoint::origin(2, kUnit);
  const auto q = LorentzPoint::lift(std::vector<double>{std::sinh(1.0), 0}, kUnit);
  const auto v = log_map(o, q, kUnit);
  EXPECT_NEAR(v.components[0], 0.0, 1e-15);
  EXPECT_NEAR(v.components[1], 1.0, 1e-14);
  EXPECT_NEAR(v.components[2], 0.0, 1e-15);
}

TEST(LogMap, RoundTripTangencyAndNorm) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Curvature k(std::uniform_real_distribution<double>(0.25, 4.0)(rng));
    const auto p = LorentzPoint::lift(oracle::random_ball(rng, 5, 10.0), k);
    const auto q = LorentzPoint::lift(oracle::random_ball(rng, 5, 10.0), k);
    const auto v = log_map(p, q, k);
    EXPECT_LT(std::abs(lorentz_inner(p.ambient(), v.components)), 1e-9);
    EXPECT_NEAR(tangent_norm(v.components), geodesic_distance(p, q, k), 1e-7);
    const auto back = exp_map(v, 1.0, k);
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(back.spatial()[j], q.spatial()[j], 1e-7);
    EXPECT_LT(constraint_error(back, k), 1e-9);
  }
}

TEST(ExpMapOrigin, Examples) {
  EXPECT_EQ(exp_map_origin(std::vector<double>(4, 0.0), kUnit), LorentzPoint::origin(4, kUnit));
  const auto o2 = LorentzPoint::origin(2, kUnit);
  EXPECT_NEAR(geodesic_distance(o2, exp_map_origin(std::vector<double>{0.6, 0.8}, kUnit), kUnit),
              1.0, 1e-12);
  const std::vector<double> v(16, 0.1);
  const auto z = exp_map_origin(v, kUnit);
  EXPECT_NEAR(oracle::distance(std::vector<double>(16, 0.0),
                               {z.spatial().begin(), z.spatial().end()}, 1.0),
              0.4, 1e-12);
}

TEST(ExpMapOrigin, EqualsGeneralExpMap) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const Curvature k(std::uniform_real_distribution<double>(0.25, 4.0)(rng));
    const auto v = oracle::random_ball(rng, 6, 4.0);
    std::vector<double> amb{0.0};
    amb.insert(amb.end(), v.begin(), v.end());
    const auto a = exp_map_origin(v, k);
    const auto b = exp_map(LorentzPoint::origin(6, k), amb, 1.0, k);
    for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(a.spatial()[j], b.spatial()[j], 1e-12 * (1 + std::abs(b.spatial()[j])));
  }
}

TEST(ExpMap, LargeCurvatureRange) {
  // Hyperboloid constraint holds after every operation, across the whole kappa range.
  std::mt19937_64 rng(6);
  for (int i = 0; i < 1000; ++i) {
    const Curvature k(std::uniform_real_distribution<double>(0.25, 4.0)(rng));
    const auto p = LorentzPoint::lift(oracle::random_ball(rng, 3, 10.0), k);
    const auto q = LorentzPoint::lift(oracle::random_ball(rng, 3, 10.0), k);
    EXPECT_LT(constraint_error(p, k), 1e-9);
    EXPECT_LT(constraint_error(exp_map(log_map(p, q, k), 0.5, k), k), 1e-9);
  }
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ogc/descent.hpp"

using namespace ogc;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

DiscretePath from_function(int n, const std::function<Vec(double)>& f) {
  Eigen::MatrixXd nodes(2, n + 1);
  for (int i = 0; i <= n; ++i) nodes.col(i) = f(static_cast<double>(i) / n);
  return DiscretePath(nodes);
}

DiscretePath diameter(int n) {
  return from_function(n, [](double s) { return v2(2 * s - 1, 0); });
}

}  // namespace

TEST(Cone, InteriorPathLeavesInteriorVariationsAlone) {
  const auto b = DomainBoundary::unit_ball(2);
  const MetricField m = MetricField::euclidean(2);
  const DiscretePath x = diameter(16);
  TangentField W = TangentField::Random(2, 17);
  W.col(0) = v2(0, 1);  // tangential at the endpoints
  W.col(16) = v2(0, -2);
  const TangentField V = project_to_cone(x, W, ConeSpec{0.2}, b, m);
  // Interior nodes away from the boundary and tangential endpoints are untouched.
  EXPECT_LT((V.middleCols(3, 11) - W.middleCols(3, 11)).norm(), 1e-15);
  EXPECT_LT((V.col(0) - W.col(0)).norm(), 1e-12);
}

TEST(Cone, OutwardNormalKilledInwardKept) {
  const auto b = DomainBoundary::unit_ball(2);
  const MetricField m = MetricField::euclidean(2);
  // Path touching the boundary at its middle node (0, 1).
  const DiscretePath x = from_function(8, [](double s) {
    const double a = std::numbers::pi * (0.25 + 0.5 * s);
    return v2(std::cos(a), std::sin(a));
  });
  const int c = 4;
  TangentField W = TangentField::Zero(2, 9);
  W.col(c) = x.node(c);  // +nu
  EXPECT_NEAR(project_to_cone(x, W, {}, b, m).col(c).dot(x.node(c)), 0.0, 1e-12);
  W.col(c) = -x.node(c);  // -nu
  EXPECT_LT((project_to_cone(x, W, {}, b, m).col(c) - W.col(c)).norm(), 1e-12);
  // Endpoint normal components are removed exactly.
  W.col(0) = x.node(0);
  EXPECT_NEAR(project_to_cone(x, W, {}, b, m).col(0).dot(x.node(0)), 0.0, 1e-12);
}

TEST(Direction, UnitNormAndNonnegativeSteepness) {
  std::mt19937_64 rng(2);
  const auto b = DomainBoundary::unit_ball(2);
  const MetricField m = MetricField::radial_conformal(2, RadialProfile::polynomial({1, 0, 1}));
  for (int k = 0; k < 5; ++k) {
    const DiscretePath x = random_admissible_path(b, 32, rng);
    const DescentDirection d = descent_direction(x, {}, b, m);
    EXPECT_GE(d.steepness, 0.0);
    if (d.steepness > 0) {
      EXPECT_NEAR(norm_star(d.v), 1.0, 1e-12);
    }
    // Steepness equals -dF[v].
    EXPECT_NEAR(d.steepness, -directional_derivative(energy_gradient(m, x), d.v), 1e-10 * (1 + d.steepness));
  }
}

TEST(Feasibility, ProjectionContracts) {
  const auto b = DomainBoundary::unit_ball(2);
  const MetricField m = MetricField::euclidean(2);
  const DiscretePath x = diameter(16);
  EXPECT_EQ(feasibility_project(x, b, m), x);
  DiscretePath y = x;
  y.nodes().col(0) = v2(-1.01, 0);
  EXPECT_LE(std::abs(b.phi(feasibility_project(y, b, m).front())), 1e-10);
  DiscretePath z = from_function(16, [](double s) {
    const double a = std::numbers::pi * s;
    return v2(std::cos(a), std::sin(a));
  });
  z.nodes().col(8) *= 1.005;
  const DiscretePath zp = feasibility_project(z, b, m);
  EXPECT_NEAR(b.phi(zp.node(8)), 0.0, 1e-10);
  EXPECT_TRUE(check_admissible(b, zp).admissible);
}

TEST(Flow, BentDiameterDescendsAndStaysAdmissible) {
  // Endpoints are free on the boundary, so the energy can drop below that of
  // the diameter; the flow has to stay admissible while it does.
  const auto b = DomainBoundary::unit_ball(2);
  const MetricField m = MetricField::euclidean(2);
  const DiscretePath x0 = from_function(64, [](double s) { return v2(2 * s - 1, 0.1 * std::sin(std::numbers::pi * s)); });
  FlowConfig cfg;
  cfg.max_iters = 200;
  const FlowResult r = flow(x0, b, m, cfg);
  EXPECT_LT(energy(m, r.path), energy(m, x0));
  EXPECT_TRUE(check_admissible(b, r.path).admissible);
  EXPECT_NEAR(b.phi(r.path.front()), 0.0, 1e-10);
  EXPECT_NEAR(b.phi(r.path.back()), 0.0, 1e-10);
}

TEST(Flow, ConstantPathTerminatesImmediately) {
  const auto b = DomainBoundary::unit_ball(2);
  const DiscretePath x0 = from_function(8, [](double) { return v2(0, 1); });
  const FlowResult r = flow(x0, b, MetricField::euclidean(2));
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(energy(MetricField::euclidean(2), r.path), 0.0);
}

TEST(Flow, EnergyNeverIncreases) {
  std::mt19937_64 rng(9);
  const auto b = DomainBoundary::unit_ball(2);
  const MetricField m =
      MetricField::perturbed_radial(2, RadialProfile::polynomial({1, 0, 1}), {Perturbation::Kind::Skew, 0.05});
  for (int k = 0; k < 4; ++k) {
    FlowConfig cfg;
    cfg.max_iters = 100;
    const FlowResult r = flow(random_admissible_path(b, 48, rng), b, m, cfg);
    for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i].energy, r.trace[i - 1].energy);
  }
}

TEST(Critical, ReferenceClassifications) {
  const auto b = DomainBoundary::unit_ball(2);
  const MetricField m = MetricField::euclidean(2);
  const CriticalReport d = verify_critical(diameter(64), b, m);
  EXPECT_EQ(d.classification, Classification::OGC);
  EXPECT_LT(d.residual_interior, 1e-8);
  EXPECT_LT(d.endpoint_angles[0], 1e-8);
  EXPECT_LT(d.endpoint_angles[1], 1e-8);
  EXPECT_LT(d.speed_variation, 1e-10);

  const DiscretePath c = from_function(64, [](double s) { return v2(1 - s, s); });
  const CriticalReport r = verify_critical(c, b, m);
  EXPECT_EQ(r.classification, Classification::NotCritical);
  EXPECT_NEAR(r.endpoint_angles[0], std::numbers::pi / 4, 1e-8);

  const DiscretePath k = from_function(8, [](double) { return v2(0, 1); });
  EXPECT_EQ(verify_critical(k, b, m).classification, Classification::Constant);
}

TEST(Critical, BoundaryArcHasPositiveMultiplier) {
  // A boundary arc of the unit circle is not an OGC; on its contact set the
  // multiplier is g(H[x'], x') / |grad phi| = |x'|^2 > 0.
  const auto b = DomainBoundary::unit_ball(2);
  const MetricField m = MetricField::euclidean(2);
  const DiscretePath arc = from_function(64, [](double s) { return v2(std::cos(s), std::sin(s)); });
  const auto lam = lambda_profile(arc, b, m);
  ASSERT_FALSE(lam.empty());
  for (const auto& [i, l] : lam) EXPECT_NEAR(l, 1.0, 1e-4) << "node " << i;
  EXPECT_NE(verify_critical(arc, b, m).classification, Classification::OGC);
}

TEST(Sobolev, RieszRepresentative) {
  // <G, V>_sobolev = covector . V for every V.
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  const int n = 20;
  TangentField C(2, n + 1), V(2, n + 1);
  for (int i = 0; i < C.size(); ++i) {
    C(i) = normal(rng);
    V(i) = normal(rng);
  }
  const TangentField G = sobolev_gradient(C);
  double inner = G.col(0).dot(V.col(0)) + G.col(n).dot(V.col(n));
  for (int i = 0; i < n; ++i) inner += n * (G.col(i + 1) - G.col(i)).dot(V.col(i + 1) - V.col(i));
  double pairing = 0.0;
  for (int i = 0; i < C.size(); ++i) pairing += C(i) * V(i);
  EXPECT_NEAR(inner, pairing, 1e-9 * (1 + std::abs(pairing)));
}

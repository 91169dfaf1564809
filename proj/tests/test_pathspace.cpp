#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ogc/path.hpp"

using namespace ogc;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

DiscretePath from_function(int n, int dim, const std::function<Vec(double)>& f) {
  Eigen::MatrixXd nodes(dim, n + 1);
  for (int i = 0; i <= n; ++i) nodes.col(i) = f(static_cast<double>(i) / n);
  return DiscretePath(nodes);
}

}  // namespace

TEST(Energy, DiameterIsFour) {
  const MetricField m = MetricField::euclidean(2);
  for (int n : {1, 7, 64, 128}) {
    const DiscretePath x = from_function(n, 2, [](double s) { return v2(2 * s - 1, 0); });
    EXPECT_NEAR(energy(m, x), 4.0, 1e-12);
  }
}

TEST(Energy, ConstantPathIsZero) {
  const DiscretePath x = from_function(16, 2, [](double) { return v2(1, 0); });
  EXPECT_EQ(energy(MetricField::euclidean(2), x), 0.0);
  EXPECT_EQ(energy_gradient(MetricField::euclidean(2), x).norm(), 0.0);
}

TEST(Energy, SemicircleApproachesLengthSquared) {
  const DiscretePath x =
      from_function(200, 2, [](double s) { return v2(std::cos(std::numbers::pi * s), std::sin(std::numbers::pi * s)); });
  const double pi2 = std::numbers::pi * std::numbers::pi;
  EXPECT_NEAR(energy(MetricField::euclidean(2), x), pi2, 1e-3 * pi2);
}

TEST(Energy, PartialEnergiesAddUp) {
  std::mt19937_64 rng(3);
  const auto b = DomainBoundary::unit_ball(2);
  const MetricField m = MetricField::radial_conformal(2, RadialProfile::polynomial({1, 0, 1}));
  const DiscretePath x = random_admissible_path(b, 32, rng);
  // partial_energy is the integral over a sub-interval, so the pieces sum to the total.
  EXPECT_NEAR(partial_energy(m, x, 0, 10) + partial_energy(m, x, 10, 32), energy(m, x), 1e-12);
}

TEST(Energy, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  const auto b = DomainBoundary::unit_ball(2);
  const MetricField m =
      MetricField::perturbed_radial(2, RadialProfile::polynomial({1, 0, 1}), {Perturbation::Kind::Skew, 0.05});
  for (int trial = 0; trial < 10; ++trial) {
    const DiscretePath x = random_admissible_path(b, 24, rng);
    TangentField V(2, 25);
    for (int i = 0; i < V.size(); ++i) V(i) = normal(rng);
    const double h = 1e-6;
    const double fd = (energy(m, DiscretePath(x.nodes() + h * V)) - energy(m, DiscretePath(x.nodes() - h * V))) / (2 * h);
    const double an = directional_derivative(energy_gradient(m, x), V);
    EXPECT_NEAR(an, fd, 1e-6 * std::abs(fd) + 1e-9);
  }
}

TEST(Norms, DistancesAndReverse) {
  const DiscretePath x = from_function(8, 2, [](double s) { return v2(s, s * s); });
  const DiscretePath y = reverse(x);
  EXPECT_EQ(reverse(y), x);
  EXPECT_EQ(dist_inf(x, x), 0.0);
  EXPECT_EQ(dist_star(x, x), 0.0);
  const DiscretePath z(x.nodes().array() + 0.1);
  EXPECT_NEAR(dist_inf(x, z), 0.1 * std::sqrt(2.0), 1e-12);
  EXPECT_GE(dist_star(x, z), dist_inf(x, z) - 1e-12);
  EXPECT_NEAR(energy(MetricField::euclidean(2), x), energy(MetricField::euclidean(2), y), 1e-14);
  TangentField V = TangentField::Zero(2, 9);
  EXPECT_EQ(norm_star(V), 0.0);
}

TEST(Chord, EndpointsAndAdmissibility) {
  const auto b = DomainBoundary::ellipsoid({2.0, 1.0});
  const Vec A = b.boundary_point(v2(1, 0.3)), B = b.boundary_point(v2(-0.2, -1));
  const DiscretePath c = chord(b, A, B, 40);
  EXPECT_LT((c.front() - A).norm(), 1e-14);
  EXPECT_LT((c.back() - B).norm(), 1e-14);
  EXPECT_TRUE(check_admissible(b, c).admissible);
  // On the unit ball the chord family is the straight segment.
  const auto ball = DomainBoundary::unit_ball(2);
  const DiscretePath d = chord(ball, v2(1, 0), v2(0, 1), 10);
  EXPECT_LT((d.node(5) - v2(0.5, 0.5)).norm(), 1e-14);
}

TEST(Constants, M0OfEuclideanDisk) {
  auto b = DomainBoundary::unit_ball(2);
  b.K0 = estimate_K0(b, MetricField::euclidean(2), 1024).inflated;
  const M0Estimate e = estimate_M0(MetricField::euclidean(2), b, 16);
  EXPECT_NEAR(e.raw_sq, 4.0, 1e-12);
  EXPECT_TRUE(e.inequality_holds);
  EXPECT_GT(e.M0, e.ratio_bound);
}

TEST(Constants, M0InequalityFailureIsReported) {
  auto b = DomainBoundary::unit_ball(2);
  b.K0 = 1e-3;  // deliberately wrong, so delta0/K0 dwarfs M0
  EXPECT_THROW(estimate_M0(MetricField::euclidean(2), b, 8), ConsistencyError);
}

TEST(Strip, LemmaAndCorollaryOnRandomPaths) {
  std::mt19937_64 rng(5);
  for (int dim : {2, 3}) {
    auto b = DomainBoundary::unit_ball(dim);
    const MetricField m = MetricField::radial_conformal(dim, RadialProfile::polynomial({1, 0, 1}));
    b.K0 = estimate_K0(b, m, 1024).inflated;
    const StripSuiteReport r = strip_suite(b, m, 40, 32, rng);
    EXPECT_EQ(r.lemma_violations, 0);
    EXPECT_EQ(r.corollary_violations, 0);
    EXPECT_GT(r.corollary_checks, 0);
    EXPECT_LE(r.max_ratio, 1.0);
  }
}

TEST(Strip, SinglePathBound) {
  auto b = DomainBoundary::unit_ball(2);
  b.K0 = 1.0;
  const MetricField m = MetricField::euclidean(2);
  const DiscretePath x = from_function(10, 2, [](double s) { return v2(1 - s, 0); });
  const StripReport r = strip_bound_check(b, m, x, 0, 10);
  // Oracle: |phi| reaches 1 at the origin; the bound is K0 * 1 * sqrt(energy) = 1.
  EXPECT_NEAR(r.max_abs_phi, 1.0, 1e-14);
  EXPECT_NEAR(r.bound, 1.0, 1e-14);
  EXPECT_TRUE(r.lemma_holds);
}

TEST(Serialization, RoundTrips) {
  std::mt19937_64 rng(1);
  const DiscretePath x = random_admissible_path(DomainBoundary::unit_ball(3), 12, rng);
  EXPECT_EQ(path_from_csv(path_to_csv(x)), x);
  EXPECT_EQ(path_from_json(path_to_json(x)), x);
}

TEST(BoundaryGrid, CoversBallInDim3) {
  const auto s = boundary_grid(DomainBoundary::unit_ball(3), 8);
  ASSERT_FALSE(s.empty());
  for (const auto& p : s) EXPECT_NEAR(p.point.norm(), 1.0, 1e-12);
  // Poles must be reachable: some sample close to +e3 and -e3.
  double up = 2, down = 2;
  for (const auto& p : s) {
    up = std::min(up, (p.point - Vec::Unit(3, 2)).norm());
    down = std::min(down, (p.point + Vec::Unit(3, 2)).norm());
  }
  EXPECT_LT(up, 0.5);
  EXPECT_LT(down, 0.5);
}
